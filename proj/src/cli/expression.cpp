#include "fracgeo/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numbers>

#include "fracgeo/mittag_leffler.hpp"

namespace fracgeo {

struct Expression::Node {
  enum Kind { number, variable, neg, add, sub, mul, div, pow, call } kind;
  double value = 0.0;
  std::size_t slot = 0;
  std::string fn;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

NodePtr make(Node::Kind k, std::vector<NodePtr> args = {}) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->args = std::move(args);
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars, std::optional<double> alpha)
      : s_(text), vars_(vars), alpha_(alpha) {}

  NodePtr parse_all() {
    NodePtr e = expr();
    skip();
    if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

  bool used_variables = false;

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at position " + std::to_string(pos_ + 1) + " in \"" + s_ + "\"", pos_);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr l = term();
    for (;;) {
      if (eat('+')) {
        l = make(Node::add, {l, term()});
      } else if (eat('-')) {
        l = make(Node::sub, {l, term()});
      } else {
        return l;
      }
    }
  }

  NodePtr term() {
    NodePtr l = unary();
    for (;;) {
      if (eat('*')) {
        l = make(Node::mul, {l, unary()});
      } else if (eat('/')) {
        l = make(Node::div, {l, unary()});
      } else {
        return l;
      }
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Node::neg, {unary()});
    if (eat('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (eat('^')) return make(Node::pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Node>();
    n->kind = Node::number;
    n->value = v;
    return n;
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string id = s_.substr(start, pos_ - start);
    if (eat('(')) {
      std::vector<NodePtr> args{expr()};
      while (eat(',')) args.push_back(expr());
      if (!eat(')')) fail("expected ')' after arguments of " + id);
      return call(id, std::move(args), start);
    }
    auto n = std::make_shared<Node>();
    if (id == "pi" || id == "e") {
      n->kind = Node::number;
      n->value = id == "pi" ? std::numbers::pi : std::numbers::e;
      return n;
    }
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      if (vars_[k] == id) {
        n->kind = Node::variable;
        n->slot = k;
        used_variables = true;
        return n;
      }
    }
    pos_ = start;
    fail("unknown variable '" + id + "'");
  }

  NodePtr call(const std::string& id, std::vector<NodePtr> args, std::size_t start) {
    static const char* unary_fns[] = {"sin", "cos", "tan", "exp", "ln", "sqrt", "abs"};
    bool known = false;
    for (const char* f : unary_fns) known = known || id == f;
    if (known) {
      if (args.size() != 1) {
        pos_ = start;
        fail(id + " takes one argument");
      }
    } else if (id == "ml") {
      if (args.size() == 1) {
        if (!alpha_) {
          pos_ = start;
          fail("ml(z) needs a context order; use ml(alpha, z)");
        }
        auto a = std::make_shared<Node>();
        a->kind = Node::number;
        a->value = *alpha_;
        args.insert(args.begin(), a);
      } else if (args.size() != 2) {
        pos_ = start;
        fail("ml takes one or two arguments");
      }
    } else {
      pos_ = start;
      fail("unknown function '" + id + "'");
    }
    auto n = std::make_shared<Node>();
    n->kind = Node::call;
    n->fn = id;
    n->args = std::move(args);
    return n;
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::optional<double> alpha_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, std::span<const double> v) {
  switch (n.kind) {
    case Node::number:
      return n.value;
    case Node::variable:
      return v[n.slot];
    case Node::neg:
      return -eval(*n.args[0], v);
    case Node::add:
      return eval(*n.args[0], v) + eval(*n.args[1], v);
    case Node::sub:
      return eval(*n.args[0], v) - eval(*n.args[1], v);
    case Node::mul:
      return eval(*n.args[0], v) * eval(*n.args[1], v);
    case Node::div:
      return eval(*n.args[0], v) / eval(*n.args[1], v);
    case Node::pow:
      return std::pow(eval(*n.args[0], v), eval(*n.args[1], v));
    case Node::call:
      break;
  }
  const double a = eval(*n.args[0], v);
  if (n.fn == "sin") return std::sin(a);
  if (n.fn == "cos") return std::cos(a);
  if (n.fn == "tan") return std::tan(a);
  if (n.fn == "exp") return std::exp(a);
  if (n.fn == "ln") return std::log(a);
  if (n.fn == "sqrt") return std::sqrt(a);
  if (n.fn == "abs") return std::abs(a);
  return mittag_leffler(a, eval(*n.args[1], v));
}

}  // namespace

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables,
                             std::optional<double> context_alpha) {
  Parser p(text, variables, context_alpha);
  Expression e;
  e.text_ = text;
  e.root_ = p.parse_all();
  e.uses_variables_ = p.used_variables;
  return e;
}

double Expression::evaluate(std::span<const double> values) const { return eval(*root_, values); }

}  // namespace fracgeo

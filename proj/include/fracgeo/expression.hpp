#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracgeo/errors.hpp"

/// Arithmetic expressions for config files.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('-' | '+') unary | power
///   power   := primary ('^' unary)?          right-associative
///   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
///
/// Functions: sin cos tan exp ln sqrt abs, ml(z) (Mittag-Leffler at the
/// context order) and ml(alpha, z). Constants: pi, e.
namespace fracgeo {

class ParseError : public DomainError {
 public:
  ParseError(const std::string& what, std::size_t position) : DomainError(what), position_(position) {}
  /// 0-based character offset into the expression text.
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class Expression {
 public:
  /// Parses `text`; `variables` lists the names an expression may use, in the
  /// order their values are passed to evaluate(). `context_alpha` enables
  /// the one-argument ml(z).
  static Expression parse(const std::string& text, const std::vector<std::string>& variables,
                          std::optional<double> context_alpha = std::nullopt);

  double evaluate(std::span<const double> values) const;
  const std::string& text() const { return text_; }
  /// True when no variable occurs in the expression.
  bool is_constant() const { return !uses_variables_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
  bool uses_variables_ = false;
};

}  // namespace fracgeo

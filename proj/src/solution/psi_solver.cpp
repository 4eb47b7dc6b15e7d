#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracgeo/errors.hpp"
#include "fracgeo/fractional_ops.hpp"
#include "fracgeo/solution.hpp"

namespace fracgeo {

TensorGrid h_grid(const Chart& chart) {
  if (!chart.sampled(kX1) || !chart.sampled(kX2)) throw DomainError("chart must sample x1 and x2");
  return TensorGrid({*chart.axis(kX1).grid, *chart.axis(kX2).grid});
}

std::vector<std::vector<double>> second_derivative_matrix(const Grid1D& g, FracOrder ord) {
  const std::size_t n = g.size();
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  if (ord.is_integer()) {
    const double h2 = g.spacing() * g.spacing();
    for (std::size_t p = 1; p + 1 < n; ++p) {
      A[p][p - 1] = 1.0 / h2;
      A[p][p] = -2.0 / h2;
      A[p][p + 1] = 1.0 / h2;
    }
    return A;
  }
  // Columns of the L1 matrix from unit vectors, then square it.
  std::vector<std::vector<double>> D(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    const GridFunction col = caputo_left(GridFunction(g, e), ord);
    for (std::size_t i = 0; i < n; ++i) D[i][j] = col[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k <= i; ++k) {
      if (D[i][k] == 0.0) continue;
      for (std::size_t j = 0; j <= k; ++j) A[i][j] += D[i][k] * D[k][j];
    }
  }
  return A;
}

namespace {

struct SparseRows {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
};

SparseRows sparse(const std::vector<std::vector<double>>& A) {
  SparseRows s;
  s.rows.resize(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) {
    for (std::size_t j = 0; j < A.size(); ++j) {
      if (A[i][j] != 0.0) s.rows[i].push_back({j, A[i][j]});
    }
  }
  return s;
}

struct PsiProblem {
  std::size_t n1, n2;
  SparseRows A1, A2;
  std::vector<double> diag1, diag2;
};

PsiProblem setup(const Chart& chart) {
  const TensorGrid hg = h_grid(chart);
  PsiProblem P;
  P.n1 = hg.axis(0).size();
  P.n2 = hg.axis(1).size();
  const auto A1 = second_derivative_matrix(hg.axis(0), chart.order(kX1));
  const auto A2 = second_derivative_matrix(hg.axis(1), chart.order(kX2));
  P.A1 = sparse(A1);
  P.A2 = sparse(A2);
  for (std::size_t p = 0; p < P.n1; ++p) P.diag1.push_back(A1[p][p]);
  for (std::size_t q = 0; q < P.n2; ++q) P.diag2.push_back(A2[q][q]);
  return P;
}

double rhs_at(const PsiOptions& opt, double psi, double ups) {
  return opt.equation == PsiEquation::linear ? opt.rhs_factor * ups : 2.0 * std::exp(psi) * ups;
}

/// Operator value at (p, q) excluding the diagonal term when skip_diag.
double apply_at(const PsiProblem& P, const std::vector<double>& psi, std::size_t p, std::size_t q, bool skip_diag) {
  double s = 0.0;
  for (const auto& [k, a] : P.A1.rows[p]) {
    if (skip_diag && k == p) continue;
    s += a * psi[k * P.n2 + q];
  }
  for (const auto& [k, a] : P.A2.rows[q]) {
    if (skip_diag && k == q) continue;
    s += a * psi[p * P.n2 + k];
  }
  return s;
}

double residual_of(const PsiProblem& P, const std::vector<double>& psi, const GridFunction& ups, const PsiOptions& opt) {
  double r = 0.0;
  for (std::size_t p = 1; p + 1 < P.n1; ++p) {
    for (std::size_t q = 1; q + 1 < P.n2; ++q) {
      const std::size_t k = p * P.n2 + q;
      r = std::max(r, std::abs(apply_at(P, psi, p, q, false) - rhs_at(opt, psi[k], ups[k])));
    }
  }
  return r;
}

void check_source(const GridFunction& ups, const Chart& chart) {
  if (!(ups.grid() == h_grid(chart))) throw DomainError("Upsilon4 must live on the (x1, x2) grid");
  ups.require_finite("Upsilon4");
}

}  // namespace

double psi_residual(const GridFunction& psi, const GridFunction& upsilon4, const Chart& chart, const PsiOptions& opt) {
  check_source(upsilon4, chart);
  const PsiProblem P = setup(chart);
  return residual_of(P, std::vector<double>(psi.values().begin(), psi.values().end()), upsilon4, opt);
}

PsiResult solve_psi(const GridFunction& upsilon4, const Chart& chart, const PsiOptions& opt) {
  check_source(upsilon4, chart);
  if (!(opt.tolerance > 0.0)) throw DomainError("psi tolerance must be positive");
  const TensorGrid hg = h_grid(chart);
  const PsiProblem P = setup(chart);

  std::vector<double> psi(hg.size(), 0.0);
  for (std::size_t p = 0; p < P.n1; ++p) {
    for (std::size_t q = 0; q < P.n2; ++q) {
      if (p == 0 || q == 0 || p + 1 == P.n1 || q + 1 == P.n2) {
        psi[p * P.n2 + q] = opt.boundary(hg.axis(0).node(p), hg.axis(1).node(q));
      }
    }
  }

  double omega = opt.relaxation;
  if (omega == 0.0) {
    const bool classical = chart.order(kX1).is_integer() && chart.order(kX2).is_integer();
    const double m = static_cast<double>(std::max(P.n1, P.n2) - 1);
    omega = classical ? 2.0 / (1.0 + std::sin(std::numbers::pi / m)) : 1.0;
  }

  PsiResult out;
  double r = residual_of(P, psi, upsilon4, opt);
  int it = 0;
  while (r > opt.tolerance) {
    if (it >= opt.max_iterations) {
      throw ConvergenceError("psi relaxation did not converge after " + std::to_string(it) +
                                 " sweeps (last residual " + std::to_string(r) + ")",
                             r, it);
    }
    for (std::size_t p = 1; p + 1 < P.n1; ++p) {
      for (std::size_t q = 1; q + 1 < P.n2; ++q) {
        const std::size_t k = p * P.n2 + q;
        const double off = apply_at(P, psi, p, q, true);
        const double target = (rhs_at(opt, psi[k], upsilon4[k]) - off) / (P.diag1[p] + P.diag2[q]);
        psi[k] += omega * (target - psi[k]);
      }
    }
    ++it;
    r = residual_of(P, psi, upsilon4, opt);
    if (!std::isfinite(r)) throw ConvergenceError("psi relaxation diverged", r, it);
  }
  out.psi = GridFunction(hg, std::move(psi));
  out.residual = r;
  out.iterations = it;
  return out;
}

}  // namespace fracgeo

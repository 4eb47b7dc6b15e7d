#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fracgeo/geometry.hpp"

/// Exact-solution generator for the 2+2 ansatz
///   g = e^psi (dx1^2 + dx2^2) + h3 (e^3)^2 + h4 (e^4)^2,
///   e^3 = dv + w_i dx^i,  e^4 = dy4 + n_i dx^i,
/// driven by a generating function phi(x1, x2, v) and sources
/// Upsilon2(x1, x2, v) (h-block) and Upsilon4(x1, x2) (v-block).
///
/// The chart must sample x1, x2 and v; y4 is ignorable unless an omega factor
/// is applied. Suffixes: f* is the Caputo partial along v, d_i along x^i.
namespace fracgeo {

struct SourceSpec {
  GridFunction upsilon2;  ///< on the chart grid (x1, x2, v)
  GridFunction upsilon4;  ///< on the h-grid (x1, x2)
};

enum class PsiEquation {
  /// d1 d1 psi + d2 d2 psi = rhs_factor * Upsilon4
  linear,
  /// d1 d1 psi + d2 d2 psi = 2 e^psi Upsilon4 (what G^3_3 = Upsilon4 requires
  /// for a conformally flat h-block at integer order)
  conformal,
};

struct PsiOptions {
  PsiEquation equation = PsiEquation::linear;
  double rhs_factor = 2.0;
  /// Dirichlet data psi(x1, x2) on the boundary of the h-grid.
  std::function<double(double, double)> boundary = [](double, double) { return 0.0; };
  double tolerance = 1e-10;
  int max_iterations = 20000;
  /// Relaxation factor; 0 selects the default (optimal SOR for alpha = 1,
  /// plain Gauss-Seidel otherwise).
  double relaxation = 0.0;
};

struct PsiResult {
  GridFunction psi;  ///< on the h-grid
  double residual = 0.0;
  int iterations = 0;
};

/// The h-grid (x1, x2) of a chart.
TensorGrid h_grid(const Chart& chart);

/// Dense second-derivative matrix along one axis: the compact three-point
/// operator at alpha = 1, the square of the L1 matrix for alpha < 1.
std::vector<std::vector<double>> second_derivative_matrix(const Grid1D& g, FracOrder ord);

/// Solves the psi equation on the h-grid by relaxation (Gauss-Seidel/SOR).
/// Throws ConvergenceError carrying the last residual.
PsiResult solve_psi(const GridFunction& upsilon4, const Chart& chart, const PsiOptions& opt);

/// Max-norm residual of the psi equation at interior nodes.
double psi_residual(const GridFunction& psi, const GridFunction& upsilon4, const Chart& chart,
                    const PsiOptions& opt);

enum class HFormula {
  /// h4 = h4_0 + s I_v[(e^{2 phi})* / (4 Upsilon2)],
  /// h3 = s (e^{2 phi})* phi* / (8 Upsilon2^2 h4), s = sign_h4.
  /// Satisfies phi = ln|h4* / sqrt|h3 h4|| and the h-block field equation.
  field_consistent,
  /// h3 = sign_h3 |phi*| / Upsilon2, h4 = h4_0 + sign_h4 2 I_v[(e^{2 phi})* / Upsilon2].
  as_printed,
};

std::string to_string(HFormula f);

struct GeneratingData {
  GridFunction phi;                 ///< on the chart grid
  std::optional<GridFunction> psi;  ///< on the h-grid; solved when absent
  std::optional<GridFunction> h4_0;            ///< default 1
  std::array<std::optional<GridFunction>, 2> n1;  ///< default 0
  std::array<std::optional<GridFunction>, 2> n2;  ///< default 0
  int sign_h3 = 1;
  int sign_h4 = 1;
  HFormula formula = HFormula::field_consistent;
  PsiOptions psi_options;
};

struct SolutionBundle {
  explicit SolutionBundle(Chart c) : chart(std::move(c)) {}

  /// Chart the coefficients live on. When alpha_v < 1 the first v-node is
  /// dropped (every left Caputo derivative vanishes at the terminal, so
  /// phi* = 0 and h3 = 0 there) and the next node becomes the terminal.
  Chart chart;
  std::size_t v_trimmed = 0;
  HFormula formula = HFormula::field_consistent;

  GridFunction psi;  ///< h-grid
  double psi_residual = 0.0;
  int psi_iterations = 0;

  GridFunction g1, g2, h3, h4;
  std::array<GridFunction, 2> w, n;

  GridFunction phi, phi_star;
  /// ln|h4* / sqrt|h3 h4||, (ln(|h4|^{3/2} / |h3|))*, h4* d_i phi, h4* phi*.
  GridFunction aux_phi, aux_gamma, aux_beta;
  std::array<GridFunction, 2> aux_alpha;

  /// Optional non-Killing factor on a chart that also samples y4.
  std::optional<Chart> omega_chart;
  std::optional<GridFunction> omega;
  double omega_residual = 0.0;
};

/// Runs the generation recipe. Throws GenerationError (with node) for a
/// constant phi, a vanishing Upsilon2 or phi*, or h3/h4 touching zero.
SolutionBundle generate_solution(const GeneratingData& gen, const SourceSpec& src, const Chart& chart);

/// Levi-Civita families: w_i* = e_i ln|h4|, e_k w_i = e_i w_k, n_i* = 0,
/// d_i n_k = d_k n_i; e_k = d_k - w_k d_v - n_k d_y4.
ConstraintReport check_lc_solution(const SolutionBundle& sol, double tolerance);

/// Multiplies the v-block by omega^2 and records max |e_k omega|.
/// omega lives on `omega_chart`, which must sample y4 and agree with the
/// bundle chart on x1, x2, v. Throws DomainError for nonpositive omega.
SolutionBundle apply_omega(const SolutionBundle& sol, const Chart& omega_chart, const GridFunction& omega);

struct ResidualEntry {
  std::string name;
  double value = 0.0;
};

struct FieldEquationReport {
  std::vector<ResidualEntry> components;  ///< G^a_b - Upsilon^a_b per component
  double max_diagonal = 0.0;
  double max_off_diagonal = 0.0;
  double max_total = 0.0;
};

/// Assembles (g, N) from the bundle, runs the geometry stack and compares
/// G^alpha_beta with diag(Upsilon2, Upsilon2, Upsilon4, Upsilon4).
FieldEquationReport verify_field_equations(const SolutionBundle& sol, const SourceSpec& src,
                                           double det_floor = 1e-12);

/// d-metric and N-connection of a bundle on its (or the omega) chart.
DMetric bundle_metric(const SolutionBundle& sol);
NConnectionField bundle_nconnection(const SolutionBundle& sol);
const Chart& bundle_chart(const SolutionBundle& sol);

}  // namespace fracgeo

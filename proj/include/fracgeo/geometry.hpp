#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fracgeo/grid.hpp"

/// N-adapted geometry on a 2+2 split chart (x1, x2 | v, y4).
///
/// Index conventions used throughout:
///  - coordinates 0,1 are horizontal (i, j, k), 2,3 vertical (a, b, c);
///  - e_beta = (e_i = d_i - N^a_i d_a, e_b = d_b), d = Caputo partial;
///  - D_{e_gamma} e_beta = Gamma^tau_{beta gamma} e_tau;
///  - [e_alpha, e_beta] = W^gamma_{alpha beta} e_gamma;
///  - T^tau_{gamma delta} = Gamma^tau_{delta gamma} - Gamma^tau_{gamma delta} - W^tau_{gamma delta};
///  - R^tau_{beta gamma delta} = [R(e_delta, e_gamma) e_beta]^tau;
///  - R_{alpha beta} = R^tau_{alpha beta tau}.
///
/// Fields are GridFunctions on the chart grid; an empty GridFunction stands
/// for an identically zero field and is skipped by all algebra.
namespace fracgeo {

enum Coord : std::size_t { kX1 = 0, kX2 = 1, kV = 2, kY4 = 3 };
inline constexpr std::size_t kDim = 4;
inline constexpr std::size_t kNh = 2;

inline bool is_h(std::size_t c) { return c < kNh; }
inline bool is_zero(const GridFunction& f) { return f.size() == 0; }

/// One chart coordinate: sampled on a grid, or ignorable (every field is
/// constant along it and its derivatives vanish identically).
struct AxisSpec {
  std::optional<Grid1D> grid;
  FracOrder order{1.0};
  /// Coordinate value fed to expressions when the axis is ignorable.
  double fixed_value = 0.0;

  static AxisSpec sampled(Grid1D g, double alpha) { return {g, FracOrder(alpha), 0.0}; }
  static AxisSpec ignorable(double value = 0.0) { return {std::nullopt, FracOrder(1.0), value}; }
};

class Chart {
 public:
  explicit Chart(std::array<AxisSpec, kDim> axes);

  const TensorGrid& grid() const { return grid_; }
  const AxisSpec& axis(std::size_t coord) const { return axes_[coord]; }
  bool sampled(std::size_t coord) const { return axes_[coord].grid.has_value(); }
  /// Position of a sampled coordinate among the grid axes.
  std::size_t grid_axis(std::size_t coord) const;
  FracOrder order(std::size_t coord) const { return axes_[coord].order; }

  /// Caputo partial along a coordinate; zero in, zero out.
  GridFunction partial(const GridFunction& f, std::size_t coord) const;

  /// Samples f(x1, x2, v, y4) at every node.
  GridFunction sample(const std::function<double(const std::array<double, kDim>&)>& f) const;
  /// Coordinates of a node.
  std::array<double, kDim> point(std::size_t flat) const;

  Chart refined() const;
  Chart with_axis(std::size_t coord, AxisSpec spec) const;

 private:
  std::array<AxisSpec, kDim> axes_;
  std::array<std::size_t, kDim> grid_axis_{};
  TensorGrid grid_;
};

/// Block metric g = g_ij e^i e^j + g_ab e^a e^b. Blocks are indexed 0..1
/// inside each block; h[i][j], v[a][b] with symmetric entries stored twice.
struct DMetric {
  std::array<std::array<GridFunction, 2>, 2> h;
  std::array<std::array<GridFunction, 2>, 2> v;

  /// Full 4x4 component in the N-adapted basis (zero across blocks).
  const GridFunction& operator()(std::size_t alpha, std::size_t beta) const;
  static DMetric diagonal(GridFunction g1, GridFunction g2, GridFunction h3, GridFunction h4);
  void validate(double det_floor) const;
};

/// Signature of a 2x2 block at a node: "++", "--" or "+-".
std::string block_signature(double g00, double g01, double g11);

struct InverseDMetric {
  std::array<std::array<GridFunction, 2>, 2> h;
  std::array<std::array<GridFunction, 2>, 2> v;
  const GridFunction& operator()(std::size_t alpha, std::size_t beta) const;
};

/// Per-node 2x2 inverses; throws SingularMetricError when |det| < det_floor
/// or a block changes signature.
InverseDMetric invert(const DMetric& g, const TensorGrid& grid, double det_floor = 1e-12);

/// N-connection coefficients N[a][i] = N^{a+2}_i.
struct NConnectionField {
  std::array<std::array<GridFunction, 2>, 2> N;
  const GridFunction& operator()(std::size_t a_coord, std::size_t i) const { return N[a_coord - kNh][i]; }
};

/// Frame e_beta and co-frame e^beta over the coordinate (Caputo) basis.
class FrameField {
 public:
  FrameField(const Chart& chart, const NConnectionField& n) : chart_(&chart), n_(&n) {}

  /// e_beta f.
  GridFunction apply(std::size_t beta, const GridFunction& f) const;
  /// e_beta f reusing precomputed coordinate partials d[mu] = d_mu f.
  GridFunction apply(std::size_t beta, const std::array<GridFunction, kDim>& d) const;

  /// Row beta of the frame: e_beta = E[beta][mu] d_mu, at a node.
  std::array<std::array<double, kDim>, kDim> frame_at(std::size_t node) const;
  /// Row beta of the co-frame: e^beta = C[beta][mu] dx^mu, at a node.
  std::array<std::array<double, kDim>, kDim> coframe_at(std::size_t node) const;
  /// max over nodes of |<e^beta, e_gamma> - delta|.
  double duality_residual() const;

  const Chart& chart() const { return *chart_; }
  const NConnectionField& n() const { return *n_; }

 private:
  const Chart* chart_;
  const NConnectionField* n_;
};

/// Rank-3 component array T[t][b][c], flat index 16 t + 4 b + c.
struct Tensor3 {
  std::array<GridFunction, 64> c;
  GridFunction& operator()(std::size_t t, std::size_t b, std::size_t g) { return c[16 * t + 4 * b + g]; }
  const GridFunction& operator()(std::size_t t, std::size_t b, std::size_t g) const {
    return c[16 * t + 4 * b + g];
  }
};

/// Rank-4 component array R[t][b][c][d].
struct Tensor4 {
  std::array<GridFunction, 256> c;
  GridFunction& operator()(std::size_t t, std::size_t b, std::size_t g, std::size_t d) {
    return c[64 * t + 16 * b + 4 * g + d];
  }
  const GridFunction& operator()(std::size_t t, std::size_t b, std::size_t g, std::size_t d) const {
    return c[64 * t + 16 * b + 4 * g + d];
  }
};

/// 4x4 component array.
struct Tensor2 {
  std::array<GridFunction, 16> c;
  GridFunction& operator()(std::size_t a, std::size_t b) { return c[4 * a + b]; }
  const GridFunction& operator()(std::size_t a, std::size_t b) const { return c[4 * a + b]; }
};

struct Nonholonomy {
  /// Structure functions of the frame commutators.
  Tensor3 W;
  /// omega[a][j][i] = e_i N^a_j - e_j N^a_i, a = 0..1 for coordinates 2..3.
  std::array<std::array<std::array<GridFunction, 2>, 2>, 2> omega;
};

Nonholonomy nonholonomy(const FrameField& frames);

/// Gamma^tau_{beta gamma} with the four d-connection blocks
/// L^i_jk, L^a_bk, C^i_jc, C^a_bc; cross-block entries are zero.
struct DConnection {
  Tensor3 gamma;
};

DConnection canonical_dconnection(const DMetric& g, const InverseDMetric& ginv, const FrameField& frames);

Tensor3 torsion(const DConnection& conn, const Nonholonomy& nh);
Tensor4 curvature(const DConnection& conn, const FrameField& frames, const Nonholonomy& nh);
/// R_{alpha beta} = R^tau_{alpha beta tau}.
Tensor2 ricci(const Tensor4& R);

struct ScalarCurvature {
  GridFunction h_trace;  ///< g^ij R_ij
  GridFunction v_trace;  ///< g^ab R_ab
  GridFunction total;    ///< sum of both
};

ScalarCurvature scalar_curvature(const Tensor2& ric, const InverseDMetric& ginv, const TensorGrid& grid);
Tensor2 einstein_tensor(const Tensor2& ric, const GridFunction& total_scalar, const DMetric& g,
                        const TensorGrid& grid);
/// G^alpha_beta = g^{alpha gamma} G_{gamma beta}.
Tensor2 raise_first(const Tensor2& t, const InverseDMetric& ginv, const TensorGrid& grid);

/// max over nodes and components of |D_gamma g_{alpha beta}|.
double metric_compatibility_residual(const DConnection& conn, const DMetric& g, const FrameField& frames);

struct ConstraintFamily {
  std::string name;
  double residual = 0.0;
  bool pass = false;
};

struct ConstraintReport {
  std::vector<ConstraintFamily> families;
  double tolerance = 0.0;
  bool all_pass() const;
};

/// Residuals of the Levi-Civita restriction L^c_aj = e_a N^c_j, C^i_jb = 0, Omega = 0.
ConstraintReport check_lc_constraints(const DConnection& conn, const Nonholonomy& nh,
                                      const FrameField& frames, double tolerance);

/// Everything computed from (g, N) on a chart.
struct GeometryStack {
  InverseDMetric ginv;
  Nonholonomy nonholonomy;
  DConnection connection;
  Tensor3 torsion;
  Tensor4 curvature;
  Tensor2 ricci;
  ScalarCurvature scalar;
  Tensor2 einstein;
};

GeometryStack compute_stack(const Chart& chart, const DMetric& g, const NConnectionField& n,
                            double det_floor = 1e-12);

/// max |f| with zero fields counted as 0.
double max_norm(const GridFunction& f);

/// Brute-force commutator residual for one test function:
/// max over (alpha, beta) of |e_alpha e_beta f - e_beta e_alpha f - W^gamma_{alpha beta} e_gamma f|.
double commutator_residual(const FrameField& frames, const Nonholonomy& nh, const GridFunction& f);

}  // namespace fracgeo

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracgeo/expression.hpp"
#include "fracgeo/geometry.hpp"
#include "fracgeo/solitons.hpp"
#include "fracgeo/solution.hpp"

/// Typed run configuration loaded from a YAML file. Every expression is
/// parsed at load time so that all input errors surface before any
/// computation, with file:line:column positions.
namespace fracgeo {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An expression together with where it came from.
struct ExprField {
  Expression expr;
  std::string where;  ///< "file:line:col"
};

/// Chart axis settings: sampled on a grid or ignorable at a fixed value.
struct AxisConfig {
  std::optional<Grid1D> grid;
  double alpha = 1.0;
  double value = 0.0;

  AxisSpec spec() const { return grid ? AxisSpec::sampled(*grid, alpha) : AxisSpec::ignorable(value); }
};

struct ChartConfig {
  std::array<AxisConfig, kDim> axes;
  Chart chart() const;
};

struct FracopsConfig {
  std::optional<ExprField> f;  ///< variable x
  Grid1D grid = Grid1D::uniform(0.0, 1.0, 3);
  double alpha = 0.5;
  std::optional<ExprField> exact;  ///< expected Caputo derivative
  double fundamental_tolerance = 1e-3;
  double eigen_tolerance = 1e-2;
  double exact_tolerance = 1e-2;
};

struct GeometryConfig {
  ChartConfig chart;
  /// Variables x1, x2, v, y4. Blocks are symmetric; off-diagonal entries default to 0.
  std::array<std::array<std::optional<ExprField>, 2>, 2> h, v;
  /// N[a][i] = N^{a+3}_{i+1}; default 0.
  std::array<std::array<std::optional<ExprField>, 2>, 2> n;
  double det_floor = 1e-12;
  double compatibility_tolerance = 1e-2;
  double torsion_tolerance = 1e-2;
  double commutator_tolerance = 1e-2;
  std::vector<ExprField> test_functions;
};

struct GenerateConfig {
  ChartConfig chart;
  std::optional<ExprField> phi;       ///< x1, x2, v
  std::optional<ExprField> upsilon2;  ///< x1, x2, v
  std::optional<ExprField> upsilon4;  ///< x1, x2
  std::optional<ExprField> h4_0;      ///< x1, x2
  std::array<std::optional<ExprField>, 2> n1, n2;  ///< x1, x2
  int sign_h3 = 1;
  int sign_h4 = 1;
  HFormula formula = HFormula::field_consistent;
  PsiOptions psi;
  std::optional<ExprField> psi_boundary;  ///< x1, x2
  /// Non-Killing factor (x1, x2, v, y4) and the y4 axis it is sampled on.
  std::optional<ExprField> omega;
  std::optional<AxisConfig> omega_y4;
  double lc_tolerance = 1e-8;
  double field_tolerance = 1e-2;
  double omega_tolerance = 1e-8;
};

struct CurveConfig {
  std::string type = "circle";  ///< circle | ellipse | perturbed_circle | constant | csv
  double radius = 1.0;
  double a = 2.0, b = 1.0;
  double eps = 0.1;
  int k = 3;
  std::size_t samples = 128;
  Vec2 center{0.0, 0.0};
  std::string csv_path;  ///< resolved against the config directory
  double period = 0.0;   ///< csv curves
  bool closed = true;    ///< csv curves
  BlockMetric metric;
};

struct SolitonConfig {
  int flow = 1;  ///< 0, 1 or -1
  CurveConfig h;
  std::optional<CurveConfig> v;
  double tau_end = 1.0;
  Flow0Method flow0_method = Flow0Method::spectral;
  Flow1Options flow1;
  double flow0_dt = 0.0;
  double flow0_cfl = 1.0;
  std::size_t observe_every = 0;
  std::string y_direction = "tangent";  ///< tangent | zero
  double drift_tolerance = 1e-6;
  double radius_tolerance = 1e-5;
  double return_tolerance = 1e-8;
  std::optional<double> minus1_expected;
  double minus1_tolerance = 1e-8;
};

struct RunConfig {
  std::string command;
  std::string name;  ///< file name of the config, for reports
  int refine_levels = 3;
  std::optional<FracopsConfig> fracops;
  std::optional<GeometryConfig> geometry;
  std::optional<GenerateConfig> generate;
  std::optional<SolitonConfig> soliton;
};

/// Loads and validates a config for `command`. Throws ConfigError.
RunConfig load_config(const std::string& path, const std::string& command);

}  // namespace fracgeo

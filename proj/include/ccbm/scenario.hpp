#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ccbm/descent.hpp"
#include "ccbm/mesh.hpp"

namespace ccbm {

/// lambda for which C(0, outer) is the exact free boundary around C(0, inner) in 2D: 1 / (R log(r/R)).
double lambda_annulus_2d(double inner, double outer);
/// 3D analogue for concentric spheres: -r / (R (R - r)).
double lambda_annulus_3d(double inner, double outer);
/// Radius R > r of the exact 2D free boundary for a given lambda < 0 (inverse of lambda_annulus_2d).
double bernoulli_radius_2d(double inner, double lambda);

/// Closed-form complex Robin state on the annulus r < rho < R:
/// u = a + b log(rho), b = (lambda - i) / (1/R + i log(R/r)), a = 1 - b log(r).
std::complex<double> radial_exact_solution(double inner, double outer, double lambda, double rho);

enum class MethodSelection { Ccbm, Kv, Both };

struct Scenario {
  std::string name = "custom";
  std::string boundary = "circle";  // circle | lshape | ribbon | polygon
  double inner_radius = 0.5;        // circle only
  Polyline polygon;                 // polygon only
  Vec2 star_center = Vec2::Zero();  // circle and polygon
  std::optional<double> lambda;
  std::optional<double> target_radius;  // circle: exact free-boundary radius
  double initial_sigma_radius = 1.25;
  double h = 0.05;
  DescentConfig cfg;
  MethodSelection method = MethodSelection::Ccbm;
  int dump_every = 10;
  MeshOptions mesh;

  FixedBoundarySpec fixed_boundary() const;
  /// Explicit lambda, else lambda_annulus_2d(inner_radius, target_radius).
  double resolved_lambda() const;
  /// Radius of the exact free boundary when Gamma is a centered circle.
  std::optional<double> exact_radius() const;
  std::vector<Method> methods() const;
};

/// "example2d1" (circle), "example2d2" (L-shape), "example2d3" (ribbon).
Scenario preset(const std::string& name);
std::vector<std::string> preset_names();

struct RunOutcome {
  Method method = Method::Ccbm;
  bool ok = false;
  std::string error;
  double final_J = std::numeric_limits<double>::quiet_NaN();
  double final_J_KV = std::numeric_limits<double>::quiet_NaN();
  double final_dH = std::numeric_limits<double>::quiet_NaN();
  double mean_sigma_radius = std::numeric_limits<double>::quiet_NaN();
  int iters = 0;
  double cpu_ms = 0.0;
  StopDecision stop;
};

struct ScenarioResult {
  int exit_code = 0;  // 0 success, 1 usage or I/O, 2 numerical failure
  std::vector<RunOutcome> runs;
};

/// Builds the mesh, runs each selected method and writes, per method,
/// history.csv, boundary_<k>.txt every dump_every iterates, mesh_final.txt
/// and (CCBM) sigma_trace.txt. With both methods, output goes to ccbm/ and kv/.
ScenarioResult run_scenario(const Scenario& s, const std::filesystem::path& out_dir, std::ostream& log);

/// Cartesian product of runs, one subdirectory each, plus summary.csv
/// ("lambda,mu,h,method,final_J,final_dH,iters,cpu_ms"). Failed runs are
/// written with nan results and iters = -1.
int sweep(const Scenario& base, const std::vector<double>& lambdas, const std::vector<double>& mus,
          const std::vector<double>& hs, const std::filesystem::path& out_dir, std::ostream& log,
          unsigned workers = 0);

struct SummaryRow {
  double lambda = 0.0;
  double mu = 0.0;
  double h = 0.0;
  std::string method;
  double final_J = 0.0;
  double final_dH = 0.0;
  int iters = 0;
  double cpu_ms = 0.0;
};

std::vector<SummaryRow> read_summary_csv(std::istream& is);

}  // namespace ccbm

#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccbm/ccbm_core.hpp"
#include "ccbm/fem.hpp"
#include "ccbm/mesh.hpp"

namespace ccbm {

enum class Method { Ccbm, Kv };

std::string_view to_string(Method m);

struct DescentConfig {
  Method method = Method::Ccbm;
  double mu = 1.0;                  // step-size parameter in t = mu J / |V|^2
  double tol = 1e-6;                // max(|V|_H1, |V|_C(Sigma), J) < tol
  int max_iters = 200;
  double cost_plateau_tol = 1e-6;   // |J^k - J^{k-1}| < tol
  bool fd_mode = false;             // central-difference gradients (always on for KV)
  int max_halvings = 20;
  int fd_modes = 8;                 // Fourier modes 0..fd_modes of the FD basis
  double fd_step = 1e-4;
  // Interior relaxation of each trial mesh; relax_passes = 0 moves nodes by t V only.
  double relax_aspect = 3.0;
  int relax_passes = 10;

  /// Throws BadConfig on out-of-range values.
  void validate() const;
};

struct IterationRecord {
  int k = 0;
  double J = 0.0;
  double J_KV = 0.0;
  double grad_norm = 0.0;    // |V|_H1
  double v_inf_sigma = 0.0;  // max over Sigma vertices of |V|
  double t = 0.0;
  double d_H = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

enum class StopReason { Continue, Converged, Plateau, IterBudget };

std::string_view to_string(StopReason r);

struct StopDecision {
  StopReason reason = StopReason::Continue;
  std::string detail;

  bool stop() const { return reason != StopReason::Continue; }
};

/// Riesz representative of -G n in the H1 inner product, zero on Gamma.
DescentField sobolev_gradient(const Mesh& m, const Operators& ops, const GradientDensity& g,
                              const BoundaryGeometry& geom);

/// t = mu J / |V|^2; zero when J or |V| vanishes.
double step_size(double cost, const DescentField& v, double mu);

struct LineSearchResult {
  Mesh mesh;
  double t = 0.0;
  double cost = 0.0;
  int halvings = 0;
  bool relaxed = false;
};

/// Returns true when it changed the mesh.
using MeshRelaxer = std::function<bool(Mesh&)>;

/// Halves t while the move inverts a triangle or the cost increases.
/// At each t the relaxed trial mesh is tried first, then the plain one.
/// Throws StepCollapse after `max_halvings` failed halvings.
LineSearchResult backtrack(const Mesh& m, const DescentField& v, double t0, double current_cost,
                           const std::function<double(const Mesh&)>& cost_at, int max_halvings,
                           const MeshRelaxer& relax = {});

StopDecision check_stopping(const IterationRecord& rec, const IterationRecord* prev, const DescentConfig& cfg);

/// Cost of `which` on a mesh: full re-solve.
double evaluate_cost(const Mesh& m, double lambda, Method which);

/// (cost(m + tV) - cost(m - tV)) / 2t with a full re-solve on each moved mesh.
double fd_directional_derivative(const Mesh& m, double lambda, std::span<const Vec2> v, double t, Method which);

/// Sobolev gradient from finite differences: H1 extensions of Fourier normal
/// fields on Sigma span the search space, and the Gram system in the H1 inner
/// product gives the steepest-descent combination.
DescentField fd_sobolev_gradient(const Mesh& m, const Operators& ops, double lambda, const DescentConfig& cfg);

struct DescentResult {
  Mesh final_mesh;
  std::vector<IterationRecord> history;
  StopDecision stop;
};

/// Called with (k, mesh) at the start of iteration k and once more with the final mesh.
using IterateObserver = std::function<void(int, const Mesh&)>;

DescentResult run_descent(const Mesh& initial, double lambda, const DescentConfig& cfg,
                          const std::optional<Polyline>& reference = std::nullopt,
                          const IterateObserver& observer = {});

/// Header "k,J,J_KV,grad_norm,v_inf_sigma,t,d_H,wall_ms", 17 significant digits.
void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history);
std::vector<IterationRecord> read_history_csv(std::istream& is);

}  // namespace ccbm

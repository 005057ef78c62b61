#include "ccbm/descent.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "ccbm/errors.hpp"
#include "ccbm/kohn_vogelius.hpp"
#include "ccbm/mesh_io.hpp"

namespace ccbm {

std::string_view to_string(Method m) { return m == Method::Ccbm ? "ccbm" : "kv"; }

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::Continue: return "Continue";
    case StopReason::Converged: return "Converged";
    case StopReason::Plateau: return "Plateau";
    case StopReason::IterBudget: return "IterBudget";
  }
  return "Unknown";
}

void DescentConfig::validate() const {
  if (!(mu > 0.0)) throw Error(ErrorCode::BadConfig, "mu must be positive");
  if (!(tol >= 0.0)) throw Error(ErrorCode::BadConfig, "tol must be non-negative");
  if (max_iters < 1) throw Error(ErrorCode::BadConfig, "max_iters must be at least 1");
  if (!(cost_plateau_tol >= 0.0)) throw Error(ErrorCode::BadConfig, "cost_plateau_tol must be non-negative");
  if (max_halvings < 0) throw Error(ErrorCode::BadConfig, "max_halvings must be non-negative");
  if (!(relax_aspect >= 1.0)) throw Error(ErrorCode::BadConfig, "relax_aspect must be at least 1");
  if (relax_passes < 0) throw Error(ErrorCode::BadConfig, "relax_passes must be non-negative");
  if (fd_modes < 0) throw Error(ErrorCode::BadConfig, "fd_modes must be non-negative");
  if (!(fd_step > 0.0)) throw Error(ErrorCode::BadConfig, "fd_step must be positive");
}

DescentField sobolev_gradient(const Mesh& m, const Operators& ops, const GradientDensity& g,
                              const BoundaryGeometry& geom) {
  std::vector<Vec2> source(m.sigma_count());
  for (int k = 0; k < m.sigma_count(); ++k) source[k] = -g.values()[k] * geom.normals[k];
  return solve_vector_h1(m, ops, source);
}

double step_size(double cost, const DescentField& v, double mu) {
  if (cost <= 0.0 || v.h1_norm <= 0.0) return 0.0;
  return mu * cost / (v.h1_norm * v.h1_norm);
}

LineSearchResult backtrack(const Mesh& m, const DescentField& v, double t0, double current_cost,
                           const std::function<double(const Mesh&)>& cost_at, int max_halvings,
                           const MeshRelaxer& relax) {
  double t = t0;
  for (int halvings = 0; halvings <= max_halvings; ++halvings, t *= 0.5) {
    Mesh trial;
    try {
      trial = move_mesh(m, v.values, t);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MeshInversion) throw;
      continue;
    }
    if (relax) {
      Mesh relaxed = trial;
      if (relax(relaxed)) {
        const double c = cost_at(relaxed);
        if (std::isfinite(c) && c <= current_cost) return {std::move(relaxed), t, c, halvings, true};
      }
    }
    const double c = cost_at(trial);
    if (std::isfinite(c) && c <= current_cost) return {std::move(trial), t, c, halvings, false};
  }
  throw Error(ErrorCode::StepCollapse, "no acceptable step after " + std::to_string(max_halvings) +
                                           " halvings from t = " + format_double(t0, 6));
}

StopDecision check_stopping(const IterationRecord& rec, const IterationRecord* prev, const DescentConfig& cfg) {
  const double j = cfg.method == Method::Ccbm ? rec.J : rec.J_KV;
  const double worst = std::max({rec.grad_norm, rec.v_inf_sigma, j});
  if (worst < cfg.tol) {
    return {StopReason::Converged, "max(|V|, |V|_inf, J) = " + format_double(worst, 6)};
  }
  if (prev != nullptr) {
    const double jprev = cfg.method == Method::Ccbm ? prev->J : prev->J_KV;
    const double diff = std::abs(j - jprev);
    if (diff < cfg.cost_plateau_tol) return {StopReason::Plateau, "|dJ| = " + format_double(diff, 6)};
  }
  if (rec.k >= cfg.max_iters) return {StopReason::IterBudget, "k = " + std::to_string(rec.k)};
  return {};
}

double evaluate_cost(const Mesh& m, double lambda, Method which) {
  const auto ops = Operators::assemble(m);
  if (which == Method::Ccbm) return cost(ops.mass, solve_state(m, ops, lambda));
  return kv_cost(ops.stiffness, solve_kv_states(m, ops.stiffness, lambda));
}

double fd_directional_derivative(const Mesh& m, double lambda, std::span<const Vec2> v, double t, Method which) {
  const Mesh plus = move_mesh(m, v, t);
  const Mesh minus = move_mesh(m, v, -t);
  return (evaluate_cost(plus, lambda, which) - evaluate_cost(minus, lambda, which)) / (2.0 * t);
}

DescentField fd_sobolev_gradient(const Mesh& m, const Operators& ops, double lambda, const DescentConfig& cfg) {
  const int ns = m.sigma_count();
  const auto geom = boundary_geometry(m);
  const Polyline sigma = sigma_polyline(m);
  std::vector<double> phase(ns);
  const double total = perimeter(sigma);
  double arc = 0.0;
  for (int k = 0; k < ns; ++k) {
    phase[k] = 2.0 * std::numbers::pi * arc / total;
    arc += (sigma[(k + 1) % ns] - sigma[k]).norm();
  }

  std::vector<VectorField> basis;
  for (int mode = 0; mode <= cfg.fd_modes; ++mode) {
    for (int part = 0; part < (mode == 0 ? 1 : 2); ++part) {
      std::vector<Vec2> source(ns);
      for (int k = 0; k < ns; ++k) {
        const double g = part == 0 ? std::cos(mode * phase[k]) : std::sin(mode * phase[k]);
        source[k] = g * geom.normals[k];
      }
      auto field = solve_vector_h1(m, ops, source).values;
      double peak = 0.0;
      for (const auto& x : field) peak = std::max(peak, x.norm());
      if (peak == 0.0) continue;
      for (auto& x : field) x /= peak;
      basis.push_back(std::move(field));
    }
  }
  const int nb = static_cast<int>(basis.size());
  Eigen::MatrixXd gram(nb, nb);
  Eigen::VectorXd deriv(nb);
  for (int i = 0; i < nb; ++i) {
    deriv[i] = fd_directional_derivative(m, lambda, basis[i], cfg.fd_step, cfg.method);
    for (int j = 0; j <= i; ++j) gram(i, j) = gram(j, i) = h1_inner(ops, basis[i], basis[j]);
  }
  const Eigen::VectorXd coeff = gram.ldlt().solve(-deriv);

  DescentField out;
  out.values.assign(m.vertices.size(), Vec2::Zero());
  for (int i = 0; i < nb; ++i)
    for (std::size_t v = 0; v < out.values.size(); ++v) out.values[v] += coeff[i] * basis[i][v];
  out.h1_norm = std::sqrt(std::max(0.0, coeff.dot(gram * coeff)));
  return out;
}

namespace {

struct Evaluation {
  Operators ops;
  std::optional<StateSolution> state;
  double J = 0.0;
  double J_KV = 0.0;
};

Evaluation evaluate(const Mesh& m, double lambda) {
  Evaluation e{Operators::assemble(m), std::nullopt, 0.0, 0.0};
  e.state = solve_state(m, e.ops, lambda);
  e.J = cost(e.ops.mass, *e.state);
  e.J_KV = kv_cost(e.ops.stiffness, solve_kv_states(m, e.ops.stiffness, lambda));
  return e;
}

}  // namespace

DescentResult run_descent(const Mesh& initial, double lambda, const DescentConfig& cfg,
                          const std::optional<Polyline>& reference, const IterateObserver& observer) {
  cfg.validate();
  const bool use_fd = cfg.fd_mode || cfg.method == Method::Kv;
  DescentResult result;
  Mesh mesh = initial;
  std::optional<IterationRecord> prev;

  for (int k = 1;; ++k) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if (observer) observer(k, mesh);
      Evaluation ev = evaluate(mesh, lambda);
      const double current = cfg.method == Method::Ccbm ? ev.J : ev.J_KV;

      DescentField v;
      if (use_fd) {
        v = fd_sobolev_gradient(mesh, ev.ops, lambda, cfg);
      } else {
        const auto adjoint = solve_adjoint(mesh, ev.ops, *ev.state);
        const auto geom = boundary_geometry(mesh);
        v = sobolev_gradient(mesh, ev.ops, gradient_density(mesh, *ev.state, adjoint, geom, lambda), geom);
      }

      IterationRecord rec;
      rec.k = k;
      rec.J = ev.J;
      rec.J_KV = ev.J_KV;
      rec.grad_norm = v.h1_norm;
      for (int s : mesh.sigma_loop) rec.v_inf_sigma = std::max(rec.v_inf_sigma, v.values[s].norm());
      if (reference) rec.d_H = hausdorff_distance(sigma_polyline(mesh), *reference);

      StopDecision decision = check_stopping(rec, prev ? &*prev : nullptr, cfg);
      const double t0 = step_size(current, v, cfg.mu);
      if (decision.reason == StopReason::Converged || decision.reason == StopReason::Plateau || t0 == 0.0) {
        if (!decision.stop()) decision = {StopReason::Converged, "zero step"};
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        result.history.push_back(rec);
        result.stop = decision;
        break;
      }

      auto cost_at = [&](const Mesh& trial) { return evaluate_cost(trial, lambda, cfg.method); };
      MeshRelaxer relax;
      if (cfg.relax_passes > 0) {
        relax = [&](Mesh& trial) { return relax_interior(trial, cfg.relax_aspect, cfg.relax_passes) > 0; };
      }
      LineSearchResult step = backtrack(mesh, v, t0, current, cost_at, cfg.max_halvings, relax);
      if (step.cost > current) {
        throw std::logic_error("accepted step increased the cost");
      }
      rec.t = step.t;
      mesh = std::move(step.mesh);
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      result.history.push_back(rec);
      prev = rec;
      if (decision.reason == StopReason::IterBudget) {
        result.stop = decision;
        break;
      }
    } catch (const Error& e) {
      throw Error(e.code(), "iteration " + std::to_string(k) + ": " + e.what());
    }
  }
  if (observer) observer(static_cast<int>(result.history.size()) + 1, mesh);
  result.final_mesh = std::move(mesh);
  return result;
}

void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history) {
  os << "k,J,J_KV,grad_norm,v_inf_sigma,t,d_H,wall_ms\n";
  for (const auto& r : history) {
    os << r.k << ',' << format_double(r.J) << ',' << format_double(r.J_KV) << ',' << format_double(r.grad_norm)
       << ',' << format_double(r.v_inf_sigma) << ',' << format_double(r.t) << ',' << format_double(r.d_H) << ','
       << format_double(r.wall_ms) << '\n';
  }
}

namespace {

double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::Io, "bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<IterationRecord> read_history_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "k,J,J_KV,grad_norm,v_inf_sigma,t,d_H,wall_ms") {
    throw Error(ErrorCode::Io, "bad history header");
  }
  std::vector<IterationRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
      f.push_back(rest.substr(0, pos));
    f.push_back(rest);
    if (f.size() != 8) throw Error(ErrorCode::Io, "history row needs 8 fields");
    IterationRecord r;
    r.k = static_cast<int>(parse_double(f[0]));
    r.J = parse_double(f[1]);
    r.J_KV = parse_double(f[2]);
    r.grad_norm = parse_double(f[3]);
    r.v_inf_sigma = parse_double(f[4]);
    r.t = parse_double(f[5]);
    r.d_H = parse_double(f[6]);
    r.wall_ms = parse_double(f[7]);
    out.push_back(r);
  }
  return out;
}

}  // namespace ccbm

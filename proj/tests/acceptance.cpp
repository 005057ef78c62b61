// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ccbm/ccbm_core.hpp"
#include "ccbm/descent.hpp"
#include "ccbm/kohn_vogelius.hpp"
#include "ccbm/scenario.hpp"
#include "support.hpp"

using namespace ccbm;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kRadiusMeanTol = 0.02;
constexpr double kRadiusMaxTol = 0.04;
constexpr double kRecoverySeconds = 60.0;
constexpr double kMinOrder = 1.9;
constexpr double kSolveSeconds = 5.0;
constexpr double kGradientAgreement = 0.05;
constexpr int kPerturbations = 5;
constexpr double kStationarityFactor = 3.0;
constexpr double kKvCostAtOptimum = 1e-4;
constexpr double kFdStep = 1e-4;

constexpr double kInner = 0.5;
constexpr double kExactRadius = 0.7;
constexpr double kLambda = -4.24573;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Least-squares slope of log(err) against log(h).
double fitted_order(const std::vector<double>& hs, const std::vector<double>& errs) {
  const std::size_t n = hs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(hs[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

Verdict annulus_recovery() {
  const Scenario s = preset("example2d1");
  const auto t0 = std::chrono::steady_clock::now();
  const Mesh m = generate_annular_mesh(s.fixed_boundary(), s.initial_sigma_radius, s.h);
  const auto res = run_descent(m, s.resolved_lambda(), s.cfg);
  const double secs = seconds_since(t0);
  double mean = 0.0, worst = 0.0;
  const Polyline sigma = sigma_polyline(res.final_mesh);
  for (const auto& x : sigma) {
    mean += x.norm();
    worst = std::max(worst, std::abs(x.norm() - kExactRadius) / kExactRadius);
  }
  mean /= sigma.size();
  const double mean_dev = std::abs(mean - kExactRadius) / kExactRadius;
  return {mean_dev <= kRadiusMeanTol && worst <= kRadiusMaxTol && secs < kRecoverySeconds,
          "mean_radius=" + fmt(mean) + " mean_dev=" + fmt(mean_dev) + " max_dev=" + fmt(worst) +
              " iters=" + std::to_string(res.history.size()) + " seconds=" + fmt(secs)};
}

Verdict state_convergence() {
  const double R = 1.25;
  const std::vector<double> hs = {0.2, 0.1, 0.05, 0.025};
  const testing::RadialOracle exact(kInner, R, kLambda);
  std::vector<double> errs;
  double slowest = 0.0;
  for (double h : hs) {
    const Mesh m = testing::annulus_mesh(h, R, kInner);
    const auto t0 = std::chrono::steady_clock::now();
    const auto ops = Operators::assemble(m);
    const auto st = solve_state(m, ops, kLambda);
    slowest = std::max(slowest, seconds_since(t0));
    Vector er(m.vertex_count()), ei(m.vertex_count());
    for (int v = 0; v < m.vertex_count(); ++v) {
      const auto u = exact(m.vertices[v]);
      er[v] = st.u.re[v] - u.real();
      ei[v] = st.u.im[v] - u.imag();
    }
    errs.push_back(std::hypot(testing::mass_norm(ops.mass, er), testing::mass_norm(ops.mass, ei)));
  }
  const double order = fitted_order(hs, errs);
  const bool decreasing = std::is_sorted(errs.rbegin(), errs.rend());
  return {order >= kMinOrder && decreasing && slowest < kSolveSeconds,
          "errors=" + join(errs) + " order=" + fmt(order) + " slowest_solve_s=" + fmt(slowest)};
}

Verdict gradient_consistency() {
  struct Case {
    std::string name;
    FixedBoundarySpec gamma;
    double outer;
    double lambda;
  };
  const std::vector<Case> cases = {
      {"annulus", FixedBoundarySpec::circle(kInner), 1.0, kLambda},
      {"lshape", FixedBoundarySpec::lshape(), 1.25, -5.0},
      {"ribbon", FixedBoundarySpec::ribbon(), 1.25, -5.0},
  };
  const double h = 0.05;
  double worst = 0.0;
  int checked = 0;
  for (const auto& c : cases) {
    const Mesh m = generate_annular_mesh(c.gamma, c.outer, h);
    const auto ops = Operators::assemble(m);
    const auto geom = boundary_geometry(m);
    const auto st = solve_state(m, ops, c.lambda);
    const auto adj = solve_adjoint(m, ops, st);
    const auto g = gradient_density(m, st, adj, geom, c.lambda);
    for (int j = 0; j < kPerturbations; ++j) {
      // normal data 1 + 0.5 cos(j theta + j), extended into the domain by the H1 solve
      std::vector<Vec2> source(m.sigma_count());
      for (int k = 0; k < m.sigma_count(); ++k) {
        const Vec2& x = m.vertices[m.sigma_loop[k]];
        const double th = std::atan2(x.y(), x.x());
        source[k] = (1.0 + 0.5 * std::cos(j * th + j)) * geom.normals[k];
      }
      const auto V = solve_vector_h1(m, ops, source).values;
      const double boundary = g(V);
      const double volume = volume_form_derivative(m, ops, st, solve_material_derivative(m, ops, st, V), V);
      const double fd = fd_directional_derivative(m, c.lambda, V, kFdStep, Method::Ccbm);
      auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
      worst = std::max({worst, rel(boundary, volume), rel(boundary, fd), rel(volume, fd)});
      ++checked;
    }
  }
  return {worst <= kGradientAgreement,
          "meshes=3 perturbations=" + std::to_string(checked) + " worst_pairwise_rel=" + fmt(worst)};
}

Verdict stationarity() {
  const std::vector<double> hs = {0.1, 0.05, 0.025};
  std::vector<double> gmax, vnorm, cost_j, pnorm;
  for (double h : hs) {
    const Mesh m = testing::annulus_mesh(h, kExactRadius, kInner);
    const auto ops = Operators::assemble(m);
    const auto geom = boundary_geometry(m);
    const auto st = solve_state(m, ops, kLambda);
    const auto adj = solve_adjoint(m, ops, st);
    const auto g = gradient_density(m, st, adj, geom, kLambda);
    const SparseMatrix A = ops.stiffness + ops.mass;
    gmax.push_back(g.max_abs());
    vnorm.push_back(sobolev_gradient(m, ops, g, geom).h1_norm);
    cost_j.push_back(cost(ops.mass, st));
    pnorm.push_back(std::sqrt(adj.p.re.dot(A * adj.p.re) + adj.p.im.dot(A * adj.p.im)));
  }
  double weakest = 1e300;
  for (const auto* q : {&gmax, &vnorm, &cost_j, &pnorm}) {
    for (std::size_t i = 1; i < q->size(); ++i) weakest = std::min(weakest, (*q)[i - 1] / (*q)[i]);
  }
  return {weakest >= kStationarityFactor, "max|G|=" + join(gmax) + " |V|=" + join(vnorm) + " J=" + join(cost_j) +
                                              " |p|=" + join(pnorm) + " weakest_factor=" + fmt(weakest)};
}

Verdict monotone_descent() {
  std::string detail;
  bool pass = true;
  auto check = [&](const std::string& label, const Scenario& s, int required_iters) {
    const Mesh m = generate_annular_mesh(s.fixed_boundary(), s.initial_sigma_radius, s.h);
    try {
      const auto res = run_descent(m, s.resolved_lambda(), s.cfg);
      bool mono = true;
      for (std::size_t i = 1; i < res.history.size(); ++i) mono = mono && res.history[i].J <= res.history[i - 1].J;
      const bool complete = required_iters == 0 || static_cast<int>(res.history.size()) == required_iters;
      pass = pass && mono && complete;
      if (!mono || !complete) detail += " " + label + ":failed(iters=" + std::to_string(res.history.size()) + ")";
    } catch (const std::exception& e) {
      pass = false;
      detail += " " + label + ":" + e.what();
    }
  };
  for (const auto& name : preset_names()) check(name, preset(name), 0);
  for (int lam = -10; lam <= -1; ++lam) {
    Scenario s = preset("example2d2");
    s.lambda = lam;
    s.cfg.mu = 1.0;
    check("lshape_lambda" + std::to_string(lam), s, 100);
  }
  return {pass, "runs=13 (3 presets, 10 L-shape lambdas at 100 iterations)" + detail};
}

Verdict kv_equivalence() {
  const std::vector<double> hs = {0.1, 0.05, 0.025};
  std::vector<double> gaps;
  double jkv_fine = 0.0;
  for (double h : hs) {
    const Mesh m = testing::annulus_mesh(h, kExactRadius, kInner);
    const auto ops = Operators::assemble(m);
    const auto kv = solve_kv_states(m, ops.stiffness, kLambda);
    gaps.push_back(testing::mass_norm(ops.mass, kv.u_n - kv.u_d));
    jkv_fine = kv_cost(ops.stiffness, kv);
  }
  const double order = fitted_order(hs, gaps);
  return {jkv_fine < kKvCostAtOptimum && order >= kMinOrder,
          "J_KV(h=0.025)=" + fmt(jkv_fine) + " gaps=" + join(gaps) + " order=" + fmt(order)};
}

Verdict method_comparison() {
  bool pass = true;
  std::string detail;
  for (double h : {0.2, 0.1, 0.05}) {
    Scenario s = preset("example2d1");
    s.h = h;
    const Mesh m = generate_annular_mesh(s.fixed_boundary(), s.initial_sigma_radius, s.h);
    const Polyline exact = circle_polyline(kExactRadius, 4096);
    double d[2];
    for (Method method : {Method::Ccbm, Method::Kv}) {
      DescentConfig cfg = s.cfg;
      cfg.method = method;
      const auto res = run_descent(m, s.resolved_lambda(), cfg);
      d[method == Method::Ccbm ? 0 : 1] = hausdorff_distance(sigma_polyline(res.final_mesh), exact);
    }
    pass = pass && d[0] <= d[1];
    detail += " h=" + fmt(h) + ":ccbm=" + fmt(d[0]) + ",kv=" + fmt(d[1]);
  }
  return {pass, detail.substr(1)};
}

Verdict determinism() {
  Scenario s = preset("example2d1");
  auto strip_wall = [](const fs::path& p) {
    std::ifstream is(p);
    std::string line, out;
    while (std::getline(is, line)) out += line.substr(0, line.rfind(',')) + '\n';
    return out;
  };
  std::string runs[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path dir = testing::fresh_dir("acceptance_det_" + std::to_string(i));
    std::ostringstream log;
    if (run_scenario(s, dir, log).exit_code != 0) return {false, "run failed: " + log.str()};
    runs[i] = strip_wall(dir / "history.csv");
  }
  return {runs[0] == runs[1] && !runs[0].empty(), "history_bytes=" + std::to_string(runs[0].size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"annulus recovery", annulus_recovery},
      {"state convergence", state_convergence},
      {"gradient consistency", gradient_consistency},
      {"stationarity", stationarity},
      {"monotone descent", monotone_descent},
      {"KV equivalence", kv_equivalence},
      {"CCBM vs KV distance", method_comparison},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << "criterion " << i + 1 << " [" << criteria[i].first << "]: " << (v.pass ? "PASS" : "FAIL") << " "
              << v.detail << " (" << fmt(seconds_since(t0)) << " s)" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}

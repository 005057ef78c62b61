#include "ccbm/scenario.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "ccbm/ccbm_core.hpp"
#include "ccbm/errors.hpp"
#include "ccbm/kohn_vogelius.hpp"
#include "ccbm/mesh_io.hpp"

namespace ccbm {

namespace fs = std::filesystem;

namespace {

void require_radii(double inner, double outer) {
  if (!(inner > 0.0) || !(outer > inner)) {
    throw Error(ErrorCode::BadRadii, "need 0 < r < R, got r = " + format_double(inner, 6) +
                                         ", R = " + format_double(outer, 6));
  }
}

// Dense enough that the polygonal reference adds nothing visible to d_H.
constexpr int kReferenceVertices = 4096;

}  // namespace

double lambda_annulus_2d(double inner, double outer) {
  require_radii(inner, outer);
  return 1.0 / (outer * std::log(inner / outer));
}

double lambda_annulus_3d(double inner, double outer) {
  require_radii(inner, outer);
  return -inner / (outer * (outer - inner));
}

double bernoulli_radius_2d(double inner, double lambda) {
  if (!(inner > 0.0) || !(lambda < 0.0)) {
    throw Error(ErrorCode::BadRadii, "need r > 0 and lambda < 0");
  }
  // R log(R/r) = -1/lambda, increasing in R for R > r
  const double target = -1.0 / lambda;
  auto f = [&](double r_out) { return r_out * std::log(r_out / inner) - target; };
  double lo = inner, hi = 2.0 * inner;
  while (f(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::complex<double> radial_exact_solution(double inner, double outer, double lambda, double rho) {
  require_radii(inner, outer);
  const double slack = 1e-12 * outer;
  if (rho < inner - slack || rho > outer + slack) {
    throw Error(ErrorCode::BadRadii, "rho outside [r, R]");
  }
  using C = std::complex<double>;
  const C i(0.0, 1.0);
  const C b = (lambda - i) / (1.0 / outer + i * std::log(outer / inner));
  const C a = 1.0 - b * std::log(inner);
  return a + b * std::log(rho);
}

FixedBoundarySpec Scenario::fixed_boundary() const {
  if (boundary == "circle") return FixedBoundarySpec::circle(inner_radius, star_center);
  if (boundary == "lshape") return FixedBoundarySpec::lshape();
  if (boundary == "ribbon") return FixedBoundarySpec::ribbon();
  if (boundary == "polygon") return FixedBoundarySpec::polygon(polygon, star_center);
  throw Error(ErrorCode::BadConfig, "unknown boundary '" + boundary + "'");
}

double Scenario::resolved_lambda() const {
  if (lambda) return *lambda;
  if (boundary == "circle" && target_radius) return lambda_annulus_2d(inner_radius, *target_radius);
  throw Error(ErrorCode::BadConfig, "scenario '" + name + "' has no lambda");
}

std::optional<double> Scenario::exact_radius() const {
  if (boundary != "circle" || star_center.norm() != 0.0) return std::nullopt;
  if (target_radius) return target_radius;
  return bernoulli_radius_2d(inner_radius, resolved_lambda());
}

std::vector<Method> Scenario::methods() const {
  switch (method) {
    case MethodSelection::Ccbm: return {Method::Ccbm};
    case MethodSelection::Kv: return {Method::Kv};
    case MethodSelection::Both: return {Method::Ccbm, Method::Kv};
  }
  return {};
}

Scenario preset(const std::string& name) {
  Scenario s;
  s.name = name;
  s.initial_sigma_radius = 1.25;
  if (name == "example2d1") {
    s.boundary = "circle";
    s.inner_radius = 0.5;
    s.target_radius = 0.7;
    s.lambda = -4.24573;
    s.h = 0.05;
    s.cfg.mu = 2.0;
    s.cfg.tol = 1e-6;
    s.cfg.cost_plateau_tol = 1e-6;
    s.cfg.max_iters = 500;
    return s;
  }
  if (name == "example2d2" || name == "example2d3") {
    s.boundary = name == "example2d2" ? "lshape" : "ribbon";
    s.lambda = -5.0;
    s.h = 0.05;
    s.cfg.mu = 1.0;
    // fixed budget of 100 iterations
    s.cfg.tol = 0.0;
    s.cfg.cost_plateau_tol = 0.0;
    s.cfg.max_iters = 100;
    return s;
  }
  throw Error(ErrorCode::BadConfig, "unknown scenario '" + name + "'");
}

std::vector<std::string> preset_names() { return {"example2d1", "example2d2", "example2d3"}; }

namespace {

double mean_radius(const Polyline& p) {
  double sum = 0.0;
  for (const auto& x : p) sum += x.norm();
  return p.empty() ? 0.0 : sum / static_cast<double>(p.size());
}

bool directory_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) return false;
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream os(probe);
    if (!os || !(os << "x")) return false;
  }
  fs::remove(probe, ec);
  return true;
}

void write_text_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw Error(ErrorCode::Io, "cannot open " + tmp.string());
    os << text;
    if (!os) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

RunOutcome run_method(const Scenario& s, Method method, const Mesh& initial, const fs::path& dir,
                      std::ostream& log) {
  RunOutcome out;
  out.method = method;
  DescentConfig cfg = s.cfg;
  cfg.method = method;
  const auto start = std::chrono::steady_clock::now();
  try {
    const double lambda = s.resolved_lambda();
    std::optional<Polyline> reference;
    if (const auto exact = s.exact_radius()) reference = circle_polyline(*exact, kReferenceVertices);
    std::vector<Polyline> sigmas;
    auto observer = [&](int k, const Mesh& m) {
      const int index = k - 1;
      Polyline sigma = sigma_polyline(m);
      if (s.dump_every > 0 && index % s.dump_every == 0) {
        write_polyline(dir / ("boundary_" + std::to_string(index) + ".txt"), sigma);
      }
      if (!reference) sigmas.push_back(std::move(sigma));
    };

    DescentResult res = run_descent(initial, lambda, cfg, reference, observer);
    if (!reference) {
      // d_H to the final iterate; sigmas holds one entry per record plus the final mesh
      for (std::size_t k = 0; k < res.history.size(); ++k)
        res.history[k].d_H = hausdorff_distance(sigmas[k], sigmas.back());
    }
    out.cpu_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    const Polyline final_sigma = sigma_polyline(res.final_mesh);
    write_polyline(dir / "boundary_final.txt", final_sigma);
    write_mesh(dir / "mesh_final.txt", res.final_mesh);
    std::ostringstream csv;
    write_history_csv(csv, res.history);
    write_text_atomically(dir / "history.csv", csv.str());

    const auto ops = Operators::assemble(res.final_mesh);
    const auto state = solve_state(res.final_mesh, ops, lambda);
    out.final_J = cost(ops.mass, state);
    out.final_J_KV = kv_cost(ops.stiffness, solve_kv_states(res.final_mesh, ops.stiffness, lambda));
    if (method == Method::Ccbm) {
      const auto adjoint = solve_adjoint(res.final_mesh, ops, state);
      const auto geom = boundary_geometry(res.final_mesh);
      const auto g = gradient_density(res.final_mesh, state, adjoint, geom, lambda);
      std::ofstream trace(dir / "sigma_trace.txt");
      write_sigma_trace(trace, res.final_mesh, state, adjoint, geom, g);
    }
    out.final_dH = reference ? hausdorff_distance(final_sigma, *reference)
                             : (res.history.empty() ? 0.0 : res.history.back().d_H);
    out.mean_sigma_radius = mean_radius(final_sigma);
    out.iters = static_cast<int>(res.history.size());
    out.stop = res.stop;
    out.ok = true;
    log << "scenario=" << s.name << " method=" << to_string(method) << " lambda=" << format_double(lambda, 9)
        << " mu=" << format_double(cfg.mu, 6) << " h=" << format_double(s.h, 6) << " iters=" << out.iters
        << " stop=" << to_string(out.stop.reason) << " J=" << format_double(out.final_J, 6)
        << " J_KV=" << format_double(out.final_J_KV, 6)
        << " mean_radius=" << format_double(out.mean_sigma_radius, 8)
        << " d_H=" << format_double(out.final_dH, 6) << '\n';
  } catch (const Error& e) {
    out.cpu_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    out.error = e.what();
    log << "scenario=" << s.name << " method=" << to_string(method) << " FAILED: " << e.what() << '\n';
  }
  return out;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& s, const fs::path& out_dir, std::ostream& log) {
  ScenarioResult result;
  const auto methods = s.methods();
  for (Method m : methods) {
    const fs::path dir = methods.size() > 1 ? out_dir / std::string(to_string(m)) : out_dir;
    if (!directory_writable(dir)) {
      log << "error: output directory " << dir << " is not writable\n";
      result.exit_code = 1;
      return result;
    }
  }
  Mesh mesh;
  try {
    s.cfg.validate();
    s.resolved_lambda();
    mesh = generate_annular_mesh(s.fixed_boundary(), s.initial_sigma_radius, s.h, s.mesh);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    result.exit_code = 1;
    return result;
  }
  for (Method m : methods) {
    const fs::path dir = methods.size() > 1 ? out_dir / std::string(to_string(m)) : out_dir;
    result.runs.push_back(run_method(s, m, mesh, dir, log));
    if (!result.runs.back().ok) result.exit_code = 2;
  }
  return result;
}

int sweep(const Scenario& base, const std::vector<double>& lambdas, const std::vector<double>& mus,
          const std::vector<double>& hs, const fs::path& out_dir, std::ostream& log, unsigned workers) {
  if (!directory_writable(out_dir)) {
    log << "error: output directory " << out_dir << " is not writable\n";
    return 1;
  }
  struct Job {
    Scenario scenario;
    fs::path dir;
    ScenarioResult result;
    std::string log;
  };
  std::vector<Job> jobs;
  for (double lam : lambdas) {
    for (double mu : mus) {
      for (double h : hs) {
        Job job;
        job.scenario = base;
        job.scenario.lambda = lam;
        job.scenario.target_radius.reset();
        job.scenario.cfg.mu = mu;
        job.scenario.h = h;
        job.dir = out_dir / ("lambda_" + format_double(lam, 6) + "_mu_" + format_double(mu, 6) + "_h_" +
                             format_double(h, 6));
        jobs.push_back(std::move(job));
      }
    }
  }
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, std::max<std::size_t>(jobs.size(), 1));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      std::ostringstream os;
      jobs[j].result = run_scenario(jobs[j].scenario, jobs[j].dir, os);
      jobs[j].log = os.str();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  int exit_code = 0;
  std::ostringstream csv;
  csv << "lambda,mu,h,method,final_J,final_dH,iters,cpu_ms\n";
  for (const auto& job : jobs) {
    log << job.log;
    if (job.result.exit_code != 0) exit_code = std::max(exit_code, job.result.exit_code);
    const auto methods = job.scenario.methods();
    for (std::size_t k = 0; k < methods.size(); ++k) {
      const std::string lead = format_double(*job.scenario.lambda) + ',' + format_double(job.scenario.cfg.mu) +
                               ',' + format_double(job.scenario.h) + ',' + std::string(to_string(methods[k])) + ',';
      if (k < job.result.runs.size() && job.result.runs[k].ok) {
        const auto& r = job.result.runs[k];
        csv << lead << format_double(r.final_J) << ',' << format_double(r.final_dH) << ',' << r.iters << ','
            << format_double(r.cpu_ms) << '\n';
      } else {
        const double ms = k < job.result.runs.size() ? job.result.runs[k].cpu_ms : 0.0;
        csv << lead << "nan,nan,-1," << format_double(ms) << '\n';
      }
    }
  }
  write_text_atomically(out_dir / "summary.csv", csv.str());
  return exit_code;
}

namespace {

double field_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::Io, "bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<SummaryRow> read_summary_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "lambda,mu,h,method,final_J,final_dH,iters,cpu_ms") {
    throw Error(ErrorCode::Io, "bad summary header");
  }
  std::vector<SummaryRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw Error(ErrorCode::Io, "summary row needs 8 fields");
    SummaryRow r;
    r.lambda = field_double(f[0]);
    r.mu = field_double(f[1]);
    r.h = field_double(f[2]);
    r.method = f[3];
    r.final_J = field_double(f[4]);
    r.final_dH = field_double(f[5]);
    r.iters = static_cast<int>(field_double(f[6]));
    r.cpu_ms = field_double(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace ccbm

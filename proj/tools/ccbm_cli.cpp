#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccbm/config.hpp"
#include "ccbm/errors.hpp"
#include "ccbm/mesh_io.hpp"
#include "ccbm/scenario.hpp"
#include "ccbm/validation.hpp"

namespace {

struct ScenarioArgs {
  std::string scenario;
  std::string config;
  std::optional<double> h, mu, tol, lambda;
  std::optional<int> max_iters, dump_every;
  std::string method;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--scenario", scenario, "Preset: example2d1, example2d2, example2d3");
    cmd->add_option("--config", config, "Config file (key = value); overrides preset keys");
    cmd->add_option("--h", h, "Target mesh size");
    cmd->add_option("--mu", mu, "Step-size parameter");
    cmd->add_option("--tol", tol, "Stopping tolerance");
    cmd->add_option("--max-iters", max_iters, "Iteration budget");
    cmd->add_option("--lambda", lambda, "Bernoulli constant (negative)");
    cmd->add_option("--method", method, "ccbm, kv or both")->check(CLI::IsMember({"ccbm", "kv", "both"}));
    cmd->add_option("--dump-every", dump_every, "Write boundary_<k>.txt every k iterates (0 = never)");
  }

  ccbm::Scenario resolve() const {
    if (scenario.empty() && config.empty()) {
      throw ccbm::Error(ccbm::ErrorCode::BadConfig, "need --scenario or --config");
    }
    ccbm::Scenario s = scenario.empty() ? ccbm::Scenario{} : ccbm::preset(scenario);
    if (!config.empty()) s = ccbm::load_config(config, s);
    if (h) s.h = *h;
    if (mu) s.cfg.mu = *mu;
    if (tol) s.cfg.tol = *tol;
    if (max_iters) s.cfg.max_iters = *max_iters;
    if (lambda) {
      s.lambda = *lambda;
      s.target_radius.reset();
    }
    if (!method.empty()) s.method = ccbm::parse_method(method);
    if (dump_every) s.dump_every = *dump_every;
    s.cfg.validate();
    return s;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape optimization for the exterior Bernoulli free-boundary problem"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  ScenarioArgs run_args;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run_args.add_to(run);
  run->add_option("--out", run_out, "Output directory")->required();

  ScenarioArgs sweep_args;
  std::string sweep_out;
  std::vector<double> lambdas, mus, hs;
  unsigned workers = 0;
  auto* sw = app.add_subcommand("sweep", "Run the product of lambda, mu and h values");
  sweep_args.add_to(sw);
  sw->add_option("--out", sweep_out, "Output directory")->required();
  sw->add_option("--lambdas", lambdas, "Lambda values")->delimiter(',');
  sw->add_option("--mus", mus, "Step-size parameters")->delimiter(',');
  sw->add_option("--hs", hs, "Mesh sizes")->delimiter(',');
  sw->add_option("--workers", workers, "Parallel runs (0 = hardware threads)");

  auto* validate = app.add_subcommand("validate", "Quick self-checks against closed-form and finite-difference oracles");

  ScenarioArgs mesh_args;
  std::string mesh_out;
  auto* mesh = app.add_subcommand("mesh", "Generate the initial mesh of a scenario");
  mesh_args.add_to(mesh);
  mesh->add_option("--out", mesh_out, "Mesh file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      const auto s = run_args.resolve();
      return ccbm::run_scenario(s, run_out, std::cout).exit_code;
    }
    if (*sw) {
      const auto s = sweep_args.resolve();
      if (lambdas.empty()) lambdas = {s.resolved_lambda()};
      if (mus.empty()) mus = {s.cfg.mu};
      if (hs.empty()) hs = {s.h};
      return ccbm::sweep(s, lambdas, mus, hs, sweep_out, std::cout, workers);
    }
    if (*validate) {
      bool all = true;
      for (const auto& c : ccbm::run_validation()) {
        std::printf("%s  %-58s %.3e (<= %.1e)\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value, c.threshold);
        all = all && c.passed;
      }
      return all ? 0 : 2;
    }
    if (*mesh) {
      const auto s = mesh_args.resolve();
      const auto m = ccbm::generate_annular_mesh(s.fixed_boundary(), s.initial_sigma_radius, s.h, s.mesh);
      ccbm::write_mesh(mesh_out, m);
      const auto q = ccbm::mesh_quality(m);
      std::printf("vertices %d triangles %zu sigma %d aspect min %.3f mean %.3f max %.3f\n", m.vertex_count(),
                  m.triangles.size(), m.sigma_count(), q.min_aspect, q.mean_aspect, q.max_aspect);
      return 0;
    }
  } catch (const ccbm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ccbm::ErrorCode::BadConfig:
      case ccbm::ErrorCode::Io:
      case ccbm::ErrorCode::BadRadii:
      case ccbm::ErrorCode::GeometryOverlap:
      case ccbm::ErrorCode::StarShapeViolation:
        return 1;
      default:
        return 2;
    }
  }
  return 0;
}

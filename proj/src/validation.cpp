#include "ccbm/validation.hpp"

#include <cmath>

#include "ccbm/ccbm_core.hpp"
#include "ccbm/descent.hpp"
#include "ccbm/kohn_vogelius.hpp"
#include "ccbm/scenario.hpp"

namespace ccbm {

namespace {

ValidationCheck check(std::string name, double value, double threshold) {
  return {std::move(name), std::isfinite(value) && value <= threshold, value, threshold};
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

std::vector<ValidationCheck> run_validation() {
  std::vector<ValidationCheck> out;
  const double r = 0.5, R = 0.7;
  const double lambda = lambda_annulus_2d(r, R);
  const Mesh m = generate_annular_mesh(FixedBoundarySpec::circle(r), R, 0.05);
  const auto ops = Operators::assemble(m);
  const auto state = solve_state(m, ops, lambda);

  double err = 0.0;
  for (int i = 0; i < m.vertex_count(); ++i) {
    const double rho = std::clamp(m.vertices[i].norm(), r, R);
    err = std::max(err, std::abs(state.u.at(i) - radial_exact_solution(r, R, lambda, rho)));
  }
  // O(h^2) bound: h^2 max|u''| / 8 is about 4e-3 here
  out.push_back(check("exact annulus state, nodal max error", err, 5e-3));
  out.push_back(check("cost at exact annulus", cost(ops.mass, state), 1e-5));
  out.push_back(check("Kohn-Vogelius cost at exact annulus", kv_cost(ops.stiffness, solve_kv_states(m, ops.stiffness, lambda)), 1e-4));

  // gradient consistency on a non-optimal annulus
  const Mesh w = generate_annular_mesh(FixedBoundarySpec::circle(r), 1.0, 0.1);
  const auto wops = Operators::assemble(w);
  const auto ws = solve_state(w, wops, lambda);
  const auto wa = solve_adjoint(w, wops, ws);
  const auto geom = boundary_geometry(w);
  const auto g = gradient_density(w, ws, wa, geom, lambda);
  VectorField src(w.sigma_count());
  for (int k = 0; k < w.sigma_count(); ++k) {
    const Vec2 x = w.vertices[w.sigma_loop[k]];
    src[k] = (1.0 + 0.5 * std::cos(2.0 * std::atan2(x.y(), x.x()))) * geom.normals[k];
  }
  const auto v = solve_vector_h1(w, wops, src);
  const double fd = fd_directional_derivative(w, lambda, v.values, 1e-4, Method::Ccbm);
  const double boundary = g(v.values);
  const auto udot = solve_material_derivative(w, wops, ws, v.values);
  const double volume = volume_form_derivative(w, wops, ws, udot, v.values);
  out.push_back(check("boundary-form gradient vs central difference (relative)", relative(boundary, fd), 0.05));
  out.push_back(check("volume-form gradient vs central difference (relative)", relative(volume, fd), 1e-5));

  const auto sob = sobolev_gradient(w, wops, g, geom);
  out.push_back(check("Sobolev gradient: dJ[V] + |V|^2 (relative)",
                      relative(-g(sob.values), sob.h1_norm * sob.h1_norm), 1e-10));
  return out;
}

}  // namespace ccbm

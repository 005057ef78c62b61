#include <doctest.h>

#include <cmath>
#include <iostream>
#include <sstream>
#include <string>

#include "ccbm/ccbm_core.hpp"
#include "ccbm/descent.hpp"
#include "support.hpp"

using namespace ccbm;
using testing::kPi;

namespace {

constexpr double kInner = 0.5;
constexpr double kOuter = 1.25;

// L2 error of the discrete state against the radial oracle.
double state_error(double h, double lambda) {
  const Mesh m = testing::annulus_mesh(h, kOuter, kInner);
  const auto ops = Operators::assemble(m);
  const auto s = solve_state(m, ops, lambda);
  const testing::RadialOracle exact(kInner, kOuter, lambda);
  Vector er(m.vertex_count()), ei(m.vertex_count());
  for (int v = 0; v < m.vertex_count(); ++v) {
    const auto u = exact(m.vertices[v]);
    er[v] = s.u.re[v] - u.real();
    ei[v] = s.u.im[v] - u.imag();
  }
  return std::hypot(testing::mass_norm(ops.mass, er), testing::mass_norm(ops.mass, ei));
}

Complex bilinear(const Vector& ar, const Vector& ai, const SparseMatrix& M, const Vector& br, const Vector& bi) {
  return {ar.dot(M * br) - ai.dot(M * bi), ar.dot(M * bi) + ai.dot(M * br)};
}

}  // namespace

TEST_CASE("state converges to the radial solution at second order") {
  const double lambda = -3.0;
  const double e1 = state_error(0.1, lambda);
  const double e2 = state_error(0.05, lambda);
  CHECK(e1 < 1e-2);
  CHECK(std::log2(e1 / e2) > 1.8);
}

TEST_CASE("state with zero lambda matches the radial solution") {
  std::ostringstream captured;
  auto* old = std::clog.rdbuf(captured.rdbuf());
  const double e = state_error(0.05, 0.0);
  std::clog.rdbuf(old);
  CHECK(e < 2e-3);
  CHECK(captured.str().find("warning") != std::string::npos);
}

TEST_CASE("state traces follow the Robin relations and Gamma data") {
  const Mesh m = testing::annulus_mesh(0.1);
  const double lambda = -4.0;
  const auto s = solve_state(m, lambda);
  for (int v : m.gamma_loop) CHECK(s.u.at(v) == Complex(1.0, 0.0));
  for (int k = 0; k < m.sigma_count(); ++k) {
    CHECK(s.sigma.dn_re[k] == doctest::Approx(lambda + s.sigma.im[k]).epsilon(1e-14));
    CHECK(s.sigma.dn_im[k] == doctest::Approx(-s.sigma.re[k]).epsilon(1e-14));
  }
}

TEST_CASE("imaginary part is small at the exact free boundary") {
  // R = 0.7 is the exact free boundary for this lambda
  const Mesh m = testing::annulus_mesh(0.025, 0.7, 0.5);
  const auto ops = Operators::assemble(m);
  const auto s = solve_state(m, ops, -4.24573);
  CHECK(testing::mass_norm(ops.mass, s.u.im) < 1e-2);
  CHECK(cost(ops.mass, s) < 1e-5);
}

TEST_CASE("conjugate formulation gives the conjugate state") {
  const Mesh m = testing::annulus_mesh(0.2);
  const auto ops = Operators::assemble(m);
  const auto s = solve_state(m, ops, -2.0);
  const auto c = solve_state(m, ops, -2.0, RobinSign::Minus);
  CHECK((s.u.re - c.u.re).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s.u.im + c.u.im).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("adjoint vanishes for a real state and satisfies reciprocity") {
  const Mesh m = testing::annulus_mesh(0.1);
  const auto ops = Operators::assemble(m);
  const int n = m.vertex_count();

  StateSolution real_state = solve_state(m, ops, -2.0);
  real_state.u.im.setZero();
  const auto p0 = solve_adjoint(m, ops, real_state);
  CHECK(p0.p.re.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(p0.p.im.cwiseAbs().maxCoeff() < 1e-14);

  const auto s = solve_state(m, ops, -2.0);
  const auto a = solve_adjoint(m, ops, s);
  for (int v : m.gamma_loop) CHECK(a.p.at(v) == Complex(0.0, 0.0));
  // For z with (K + iB) z = M f and z = 0 on Gamma: z^T M u2 = conj(p)^T M f
  DirichletMap zero_bc;
  for (int v : m.gamma_loop) zero_bc[v] = 0.0;
  for (unsigned trial = 0; trial < 10; ++trial) {
    ComplexFieldP1 rhs(n);
    const Vector f = testing::random_vector(n, 40 + trial);
    rhs.re = ops.mass * f;
    const auto z = solve_complex_robin(m, ops.stiffness, ops.sigma_mass, rhs, zero_bc);
    const Vector zero = Vector::Zero(n);
    const Complex lhs = bilinear(z.re, z.im, ops.mass, s.u.im, zero);
    const Complex rhs_pair = bilinear(a.p.re, -a.p.im, ops.mass, f, zero);
    CHECK(std::abs(lhs - rhs_pair) < 1e-9 * (std::abs(lhs) + 1e-12));
  }
}

TEST_CASE("cost is half the squared L2 norm of the imaginary part") {
  const Mesh m = testing::annulus_mesh(0.1);
  const auto ops = Operators::assemble(m);
  StateSolution s;
  s.u = ComplexFieldP1(m.vertex_count());
  CHECK(cost(ops.mass, s) == 0.0);
  s.u.im.setOnes();
  const double area = enclosed_area(sigma_polyline(m)) - enclosed_area(gamma_polyline(m));
  CHECK(cost(ops.mass, s) == doctest::Approx(0.5 * area).epsilon(1e-12));
}

TEST_CASE("gradient density vanishes with a zero state and adjoint") {
  const Mesh m = testing::annulus_mesh(0.2);
  const auto geom = boundary_geometry(m);
  StateSolution s;
  s.u = ComplexFieldP1(m.vertex_count());
  const int ns = m.sigma_count();
  s.sigma = {std::vector<double>(ns, 0.0), std::vector<double>(ns, 0.0), std::vector<double>(ns, 0.0),
             std::vector<double>(ns, 0.0), std::vector<double>(ns, 0.0), std::vector<double>(ns, 0.0)};
  AdjointSolution a;
  a.p = ComplexFieldP1(m.vertex_count());
  a.sigma = s.sigma;
  const auto g = gradient_density(m, s, a, geom, 0.0);
  CHECK(g.max_abs() == 0.0);
}

TEST_CASE("tangential derivative of a smooth function on a circle") {
  for (int n : {64, 128}) {
    const Polyline p = circle_polyline(1.0, n);
    std::vector<double> f(n);
    for (int k = 0; k < n; ++k) f[k] = p[k].x();
    const auto d = tangential_derivative(p, f);
    double err = 0.0;
    for (int k = 0; k < n; ++k) err = std::max(err, std::abs(d[k] + p[k].y()));
    CHECK(err < 10.0 / (n * n));
  }
}

TEST_CASE("tangential divergence of simple linear fields") {
  const Mesh m = testing::annulus_mesh(0.2);
  std::vector<Vec2> identity(m.vertex_count()), rotation(m.vertex_count());
  for (int v = 0; v < m.vertex_count(); ++v) {
    identity[v] = m.vertices[v];
    rotation[v] = Vec2(-m.vertices[v].y(), m.vertices[v].x());
  }
  for (double d : sigma_edge_divergence(m, identity)) CHECK(d == doctest::Approx(1.0).epsilon(1e-12));
  for (double d : sigma_edge_divergence(m, rotation)) CHECK(std::abs(d) < 1e-12);
}

TEST_CASE("boundary-form derivative agrees with central differences") {
  const double h = 0.025;
  const double R = 1.0;
  const double lambda = -4.24573;
  const Mesh m = testing::annulus_mesh(h, R, kInner);
  const auto ops = Operators::assemble(m);
  const auto geom = boundary_geometry(m);
  const auto s = solve_state(m, ops, lambda);
  const auto a = solve_adjoint(m, ops, s);
  const auto g = gradient_density(m, s, a, geom, lambda);
  for (int mode : {0, 2, 3}) {
    const auto V = testing::smooth_velocity(m, kInner, R, mode);
    const double boundary = g(V);
    const double fd = fd_directional_derivative(m, lambda, V, 1e-4, Method::Ccbm);
    CHECK(std::abs(boundary - fd) <= 0.05 * std::abs(fd));
  }
}

TEST_CASE("material derivative matches a transported re-solve") {
  const double lambda = -4.24573;
  const Mesh m = testing::annulus_mesh(0.05, 1.0, kInner);
  const auto ops = Operators::assemble(m);
  const auto s = solve_state(m, ops, lambda);
  const auto V = testing::smooth_velocity(m, kInner, 1.0, 3);
  const auto udot = solve_material_derivative(m, ops, s, V);
  const double scale = udot.re.norm() + udot.im.norm();

  // exact derivative of the discrete nodal values: central difference agrees to O(t^2)
  const double t = 1e-4;
  const auto sp = solve_state(move_mesh(m, V, t), lambda);
  const auto sm = solve_state(move_mesh(m, V, -t), lambda);
  const Vector cre = (sp.u.re - sm.u.re) / (2 * t);
  const Vector cim = (sp.u.im - sm.u.im) / (2 * t);
  CHECK(((cre - udot.re).norm() + (cim - udot.im).norm()) < 1e-5 * scale);

  // forward difference at t = 1e-3 is O(t)
  const double tf = 1e-3;
  const auto sf = solve_state(move_mesh(m, V, tf), lambda);
  const Vector fre = (sf.u.re - s.u.re) / tf;
  const Vector fim = (sf.u.im - s.u.im) / tf;
  CHECK(((fre - udot.re).norm() + (fim - udot.im).norm()) < 1e-2 * scale);

  std::vector<Vec2> zero(m.vertex_count(), Vec2::Zero());
  const auto none = solve_material_derivative(m, ops, s, zero);
  CHECK(none.re.cwiseAbs().maxCoeff() == 0.0);
  CHECK(none.im.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("volume form is the exact derivative and agrees with the boundary form") {
  const double lambda = -4.24573;
  const Mesh m = testing::annulus_mesh(0.025, 1.0, kInner);
  const auto ops = Operators::assemble(m);
  const auto geom = boundary_geometry(m);
  const auto s = solve_state(m, ops, lambda);
  const auto a = solve_adjoint(m, ops, s);
  const auto g = gradient_density(m, s, a, geom, lambda);
  const auto V = testing::smooth_velocity(m, kInner, 1.0, 2);
  const auto udot = solve_material_derivative(m, ops, s, V);
  const double vol = volume_form_derivative(m, ops, s, udot, V);
  const double fd = fd_directional_derivative(m, lambda, V, 1e-4, Method::Ccbm);
  CHECK(std::abs(vol - fd) < 1e-5 * std::abs(fd));
  CHECK(std::abs(g(V) - vol) < 0.02 * std::abs(vol));
}

TEST_CASE("central-difference error shrinks fourfold when t halves") {
  const double lambda = -4.24573;
  const Mesh m = testing::annulus_mesh(0.1, 1.0, kInner);
  const auto ops = Operators::assemble(m);
  const auto s = solve_state(m, ops, lambda);
  const auto V = testing::smooth_velocity(m, kInner, 1.0, 2);
  const double exact = volume_form_derivative(m, ops, s, solve_material_derivative(m, ops, s, V), V);
  const double e1 = std::abs(fd_directional_derivative(m, lambda, V, 0.02, Method::Ccbm) - exact);
  const double e2 = std::abs(fd_directional_derivative(m, lambda, V, 0.01, Method::Ccbm) - exact);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("gradient density shrinks under refinement at the exact free boundary") {
  auto max_g = [](double h) {
    const Mesh m = testing::annulus_mesh(h, 0.7, kInner);
    const auto ops = Operators::assemble(m);
    const auto geom = boundary_geometry(m);
    const auto s = solve_state(m, ops, -4.24573);
    const auto a = solve_adjoint(m, ops, s);
    return gradient_density(m, s, a, geom, -4.24573).max_abs();
  };
  const double g1 = max_g(0.1), g2 = max_g(0.05);
  CHECK(g1 / g2 >= 2.0);
}

TEST_CASE("Sigma trace dump has one row of nine fields per Sigma vertex") {
  const Mesh m = testing::annulus_mesh(0.2);
  const auto ops = Operators::assemble(m);
  const auto geom = boundary_geometry(m);
  const auto s = solve_state(m, ops, -3.0);
  const auto a = solve_adjoint(m, ops, s);
  const auto g = gradient_density(m, s, a, geom, -3.0);
  std::ostringstream os;
  write_sigma_trace(os, m, s, a, geom, g);
  std::istringstream is(os.str());
  std::string line;
  int rows = 0;
  double last_s = -1.0;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    double x;
    std::vector<double> fields;
    while (ls >> x) fields.push_back(x);
    REQUIRE(fields.size() == 9);
    CHECK(fields[0] > last_s);
    last_s = fields[0];
    ++rows;
  }
  CHECK(rows == m.sigma_count());
}

#include <doctest.h>

#include <cmath>

#include "ccbm/kohn_vogelius.hpp"
#include "support.hpp"

using namespace ccbm;

namespace {

double dirichlet_error(double h) {
  const double r = 0.5, R = 1.25;
  const Mesh m = testing::annulus_mesh(h, R, r);
  const auto ops = Operators::assemble(m);
  const auto kv = solve_kv_states(m, ops.stiffness, -3.0);
  Vector e(m.vertex_count());
  for (int v = 0; v < m.vertex_count(); ++v) {
    const double rho = m.vertices[v].norm();
    e[v] = kv.u_d[v] - std::log(rho / R) / std::log(r / R);
  }
  return testing::mass_norm(ops.mass, e);
}

}  // namespace

TEST_CASE("Dirichlet state converges to the logarithmic profile") {
  const double e1 = dirichlet_error(0.1);
  const double e2 = dirichlet_error(0.05);
  CHECK(e1 < 5e-3);
  CHECK(std::log2(e1 / e2) > 1.8);
}

TEST_CASE("boundary values of both states") {
  const Mesh m = testing::annulus_mesh(0.1);
  const auto kv = solve_kv_states(m, -2.0);
  for (int v : m.gamma_loop) {
    CHECK(kv.u_n[v] == 1.0);
    CHECK(kv.u_d[v] == 1.0);
  }
  for (int v : m.sigma_loop) CHECK(kv.u_d[v] == 0.0);
  CHECK(kv_cost(m, kv) >= 0.0);
}

TEST_CASE("zero flux gives the constant Neumann state") {
  const Mesh m = testing::annulus_mesh(0.1);
  const auto kv = solve_kv_states(m, 0.0);
  CHECK((kv.u_n.array() - 1.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("Kohn-Vogelius cost of known differences") {
  const Mesh sq = testing::unit_square_two_triangles();
  const SparseMatrix K = assemble_stiffness(sq);
  KvPair same{Vector::Constant(4, 0.3), Vector::Constant(4, 0.3)};
  CHECK(kv_cost(K, same) == 0.0);
  KvPair linear{Vector(4), Vector::Zero(4)};
  for (int v = 0; v < 4; ++v) linear.u_n[v] = sq.vertices[v].x();
  CHECK(kv_cost(K, linear) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("Kohn-Vogelius cost is small at the exact free boundary") {
  const Mesh m = testing::annulus_mesh(0.05, 0.7, 0.5);
  const Mesh off = testing::annulus_mesh(0.05, 1.0, 0.5);
  const double at = kv_cost(m, solve_kv_states(m, -4.24573));
  const double away = kv_cost(off, solve_kv_states(off, -4.24573));
  CHECK(at < 1e-4);
  CHECK(at < 1e-2 * away);
}

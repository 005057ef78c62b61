#include "ccbm/kohn_vogelius.hpp"

#include <vector>

namespace ccbm {

KvPair solve_kv_states(const Mesh& m, const SparseMatrix& stiffness, double lambda) {
  std::vector<double> ones(m.sigma_count(), 1.0);
  const Vector load = lambda * assemble_boundary_load_sigma(m, ones);

  RealDirichletMap gamma_only;
  for (int v : m.gamma_loop) gamma_only.emplace(v, 1.0);
  RealDirichletMap both = gamma_only;
  for (int v : m.sigma_loop) both.emplace(v, 0.0);

  KvPair pair;
  pair.u_n = solve_real_dirichlet(stiffness, load, gamma_only);
  pair.u_d = solve_real_dirichlet(stiffness, Vector::Zero(m.vertex_count()), both);
  return pair;
}

KvPair solve_kv_states(const Mesh& m, double lambda) {
  return solve_kv_states(m, assemble_stiffness(m), lambda);
}

double kv_cost(const SparseMatrix& stiffness, const KvPair& pair) {
  const Vector diff = pair.u_n - pair.u_d;
  return 0.5 * diff.dot(stiffness * diff);
}

double kv_cost(const Mesh& m, const KvPair& pair) { return kv_cost(assemble_stiffness(m), pair); }

}  // namespace ccbm

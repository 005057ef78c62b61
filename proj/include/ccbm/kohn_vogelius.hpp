#pragma once

#include "ccbm/fem.hpp"
#include "ccbm/mesh.hpp"

namespace ccbm {

/// Mixed Dirichlet-Neumann state uN and pure Dirichlet state uD.
struct KvPair {
  Vector u_n;
  Vector u_d;
};

/// uN: K uN = lambda int_Sigma v, uN = 1 on Gamma.
/// uD: K uD = 0, uD = 1 on Gamma, uD = 0 on Sigma.
KvPair solve_kv_states(const Mesh& m, const SparseMatrix& stiffness, double lambda);
KvPair solve_kv_states(const Mesh& m, double lambda);

/// 1/2 (uN - uD)^T K (uN - uD)
double kv_cost(const SparseMatrix& stiffness, const KvPair& pair);
double kv_cost(const Mesh& m, const KvPair& pair);

}  // namespace ccbm

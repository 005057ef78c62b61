#pragma once

#include <complex>
#include <iosfwd>
#include <map>
#include <span>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "ccbm/mesh.hpp"

namespace ccbm {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Nodal complex P1 field u = re + i im.
struct ComplexFieldP1 {
  Vector re;
  Vector im;

  ComplexFieldP1() = default;
  explicit ComplexFieldP1(Eigen::Index n) : re(Vector::Zero(n)), im(Vector::Zero(n)) {}

  Eigen::Index size() const { return re.size(); }
  Complex at(Eigen::Index i) const { return {re[i], im[i]}; }
};

/// Sobolev descent field: one 2-vector per vertex plus its H1 norm.
struct DescentField {
  VectorField values;
  double h1_norm = 0.0;
};

/// P1 gradients and area of one triangle.
struct ElementGeometry {
  double area = 0.0;
  Eigen::Matrix<double, 2, 3> grad;  // column i is grad(phi_i)
};

ElementGeometry element_geometry(const Mesh& m, int triangle);

SparseMatrix assemble_stiffness(const Mesh& m);
/// Consistent P1 mass matrix.
SparseMatrix assemble_mass(const Mesh& m);
/// P1 mass matrix of the Sigma edges; rows of non-Sigma nodes are empty.
SparseMatrix assemble_boundary_mass_sigma(const Mesh& m);
/// Exact P1 quadrature of int_Sigma g v for g given per Sigma vertex (sigma_loop order).
Vector assemble_boundary_load_sigma(const Mesh& m, std::span<const double> g);
/// Lumped arc-length weight per vertex (zero away from Sigma).
Vector sigma_lumped_weights(const Mesh& m);

/// The three matrices every solve on a mesh needs.
struct Operators {
  SparseMatrix stiffness;
  SparseMatrix mass;
  SparseMatrix sigma_mass;

  static Operators assemble(const Mesh& m);
};

using DirichletMap = std::map<int, Complex>;
using RealDirichletMap = std::map<int, double>;

/// Sign of the imaginary Robin coefficient: +1 for the state (K + iB),
/// -1 for the adjoint (K - iB).
enum class RobinSign { Plus = 1, Minus = -1 };

/// Solves (K + s i B) u = rhs with Dirichlet values on exactly the Gamma nodes,
/// through the real block system [[K, -sB], [sB, K]].
ComplexFieldP1 solve_complex_robin(const Mesh& m, const SparseMatrix& stiffness,
                                   const SparseMatrix& sigma_mass, const ComplexFieldP1& rhs,
                                   const DirichletMap& dirichlet, RobinSign sign = RobinSign::Plus);

/// Symmetric positive definite solve with Dirichlet elimination.
Vector solve_real_dirichlet(const SparseMatrix& a, const Vector& rhs, const RealDirichletMap& dirichlet);

/// H1 Riesz representative: (K + M) V_c = load_c per coordinate, V = 0 on
/// Gamma, load from the lumped Sigma quadrature of source . phi.
DescentField solve_vector_h1(const Mesh& m, const Operators& ops, std::span<const Vec2> source_on_sigma);
DescentField solve_vector_h1(const Mesh& m, std::span<const Vec2> source_on_sigma);

/// sum_c V_c^T (K + M) W_c
double h1_inner(const Operators& ops, std::span<const Vec2> v, std::span<const Vec2> w);

/// Coordinate text dump, one "row col value" line per stored entry.
void write_matrix(std::ostream& os, const SparseMatrix& a);

}  // namespace ccbm

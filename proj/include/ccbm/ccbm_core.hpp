#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "ccbm/fem.hpp"
#include "ccbm/mesh.hpp"

namespace ccbm {

/// Values and derivatives of a complex field along Sigma, indexed like sigma_loop.
struct SigmaTraces {
  std::vector<double> re, im;        // nodal values
  std::vector<double> ds_re, ds_im;  // tangential derivatives
  std::vector<double> dn_re, dn_im;  // normal derivatives from the Robin relation
};

struct StateSolution {
  ComplexFieldP1 u;
  SigmaTraces sigma;
  double lambda = 0.0;
};

struct AdjointSolution {
  ComplexFieldP1 p;
  SigmaTraces sigma;
};

/// Shape-gradient density G on Sigma together with the lumped functional
/// dJ[V] = sum_k w_k G_k V(x_k) . n_k.
class GradientDensity {
 public:
  GradientDensity() = default;
  GradientDensity(std::vector<double> values, std::vector<int> sigma_loop, const BoundaryGeometry& geom);

  const std::vector<double>& values() const { return values_; }
  double max_abs() const;
  /// Directional derivative along a nodal velocity field (full vertex array).
  double operator()(std::span<const Vec2> velocity) const;

 private:
  std::vector<double> values_;
  std::vector<int> sigma_loop_;
  std::vector<Vec2> weighted_normals_;
};

/// Arc-length weighted average of the per-edge derivatives at each Sigma vertex.
std::vector<double> tangential_derivative(const Polyline& sigma, std::span<const double> values);

/// Complex Robin state: int grad u . grad v + s i int_Sigma u v = lambda int_Sigma v, u = 1 on Gamma.
/// `sign` = Minus gives the conjugate formulation.
StateSolution solve_state(const Mesh& m, const Operators& ops, double lambda, RobinSign sign = RobinSign::Plus);
StateSolution solve_state(const Mesh& m, double lambda);

/// int grad p . grad phi - i int_Sigma p phi = int u2 phi, p = 0 on Gamma.
AdjointSolution solve_adjoint(const Mesh& m, const Operators& ops, const StateSolution& s);
AdjointSolution solve_adjoint(const Mesh& m, const StateSolution& s);

/// J = 1/2 u2^T M u2.
double cost(const SparseMatrix& mass, const StateSolution& s);
double cost(const Mesh& m, const StateSolution& s);

/// Boundary form of the shape gradient, with normal derivatives taken from
/// the Robin relations.
GradientDensity gradient_density(const Mesh& m, const StateSolution& s, const AdjointSolution& a,
                                 const BoundaryGeometry& geom, double lambda);

/// Tangential divergence of a P1 field on each Sigma edge (sigma_loop order,
/// edge k joins k and k+1), evaluated as div V - (DV n) . n on the adjacent triangle.
std::vector<double> sigma_edge_divergence(const Mesh& m, std::span<const Vec2> velocity);

/// Material derivative of the discrete state along `velocity` (zero on Gamma).
ComplexFieldP1 solve_material_derivative(const Mesh& m, const Operators& ops, const StateSolution& s,
                                         std::span<const Vec2> velocity);
ComplexFieldP1 solve_material_derivative(const Mesh& m, const StateSolution& s, std::span<const Vec2> velocity);

/// Volume form 1/2 int (div V) |u2|^2 + int u2 udot2.
double volume_form_derivative(const Mesh& m, const Operators& ops, const StateSolution& s,
                              const ComplexFieldP1& udot, std::span<const Vec2> velocity);

/// One line per Sigma vertex: "s x y u1 u2 p1 p2 kappa G".
void write_sigma_trace(std::ostream& os, const Mesh& m, const StateSolution& s, const AdjointSolution& a,
                       const BoundaryGeometry& geom, const GradientDensity& g);

}  // namespace ccbm

#include "ccbm/fem.hpp"

#include <cmath>
#include <ostream>
#include <vector>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "ccbm/errors.hpp"
#include "ccbm/mesh_io.hpp"

namespace ccbm {

namespace {

using Triplet = Eigen::Triplet<double>;

constexpr double kResidualTarget = 1e-12;
constexpr double kResidualContract = 1e-10;
constexpr int kRefinementSteps = 6;

// b - a x accumulated in extended precision, so refinement can push the
// residual below the working-precision floor eps |a| |x|.
Vector extended_residual(const SparseMatrix& a, const Vector& x, const Vector& b) {
  std::vector<long double> acc(b.data(), b.data() + b.size());
  for (int col = 0; col < a.outerSize(); ++col) {
    const long double xc = x[col];
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      acc[it.row()] -= static_cast<long double>(it.value()) * xc;
    }
  }
  Vector r(b.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = static_cast<double>(acc[i]);
  return r;
}

// Direct solve followed by a few steps of iterative refinement.
template <class Factorization>
Vector refined_solve(const Factorization& f, const SparseMatrix& a, const Vector& b) {
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(b.size());
  Vector x = f.solve(b);
  for (int step = 0; step < kRefinementSteps; ++step) {
    Vector r = extended_residual(a, x, b);
    const double rnorm = r.norm();
    if (!std::isfinite(rnorm)) throw Error(ErrorCode::SingularSystem, "non-finite residual");
    if (rnorm <= kResidualTarget * bnorm) break;
    x += f.solve(r);
  }
  const double rnorm = extended_residual(a, x, b).norm();
  if (!(rnorm <= kResidualContract * bnorm)) {
    throw Error(ErrorCode::SingularSystem,
                "residual " + format_double(rnorm / bnorm, 3) + " above tolerance after refinement");
  }
  return x;
}

// Index map from all nodes to unconstrained ones.
struct FreeIndex {
  std::vector<int> of;     // -1 when constrained
  std::vector<int> nodes;  // free node per reduced index

  template <class Map>
  FreeIndex(int n, const Map& constrained) : of(n, -1) {
    for (int v = 0; v < n; ++v) {
      if (!constrained.contains(v)) {
        of[v] = static_cast<int>(nodes.size());
        nodes.push_back(v);
      }
    }
  }
  int size() const { return static_cast<int>(nodes.size()); }
};

// A_ff and rhs_f - A_fd g for a real symmetric matrix.
std::pair<SparseMatrix, Vector> reduce_real(const SparseMatrix& a, const Vector& rhs,
                                            const RealDirichletMap& dirichlet, const FreeIndex& idx) {
  std::vector<Triplet> trip;
  trip.reserve(a.nonZeros());
  Vector b(idx.size());
  for (int k = 0; k < idx.size(); ++k) b[k] = rhs[idx.nodes[k]];
  for (int col = 0; col < a.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      const int fr = idx.of[it.row()];
      if (fr < 0) continue;
      const int fc = idx.of[col];
      if (fc >= 0) {
        trip.emplace_back(fr, fc, it.value());
      } else {
        b[fr] -= it.value() * dirichlet.at(col);
      }
    }
  }
  SparseMatrix r(idx.size(), idx.size());
  r.setFromTriplets(trip.begin(), trip.end());
  return {std::move(r), std::move(b)};
}

void check_finite_area(double area, int t) {
  if (!(area > 0.0)) {
    throw Error(ErrorCode::DegenerateTriangle, "triangle " + std::to_string(t) + " has non-positive area");
  }
}

}  // namespace

ElementGeometry element_geometry(const Mesh& m, int triangle) {
  const auto& t = m.triangles[triangle];
  const Vec2& x0 = m.vertices[t[0]];
  const Vec2& x1 = m.vertices[t[1]];
  const Vec2& x2 = m.vertices[t[2]];
  ElementGeometry g;
  const double det = (x1 - x0).x() * (x2 - x0).y() - (x1 - x0).y() * (x2 - x0).x();
  g.area = 0.5 * det;
  check_finite_area(g.area, triangle);
  // grad(phi_i) = rot(x_{i+2} - x_{i+1}) / det, rot(a) = (a.y, -a.x) rotated into the interior
  const Vec2* x[3] = {&x0, &x1, &x2};
  for (int i = 0; i < 3; ++i) {
    const Vec2& a = *x[(i + 1) % 3];
    const Vec2& b = *x[(i + 2) % 3];
    g.grad(0, i) = (a.y() - b.y()) / det;
    g.grad(1, i) = (b.x() - a.x()) / det;
  }
  return g;
}

SparseMatrix assemble_stiffness(const Mesh& m) {
  std::vector<Triplet> trip;
  trip.reserve(9 * m.triangles.size());
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto g = element_geometry(m, t);
    const Eigen::Matrix3d local = g.area * (g.grad.transpose() * g.grad);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(m.triangles[t][i], m.triangles[t][j], local(i, j));
  }
  SparseMatrix k(m.vertex_count(), m.vertex_count());
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

SparseMatrix assemble_mass(const Mesh& m) {
  std::vector<Triplet> trip;
  trip.reserve(9 * m.triangles.size());
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const double area = signed_area(m, t);
    check_finite_area(area, t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(m.triangles[t][i], m.triangles[t][j], area / 12.0 * (i == j ? 2.0 : 1.0));
  }
  SparseMatrix mm(m.vertex_count(), m.vertex_count());
  mm.setFromTriplets(trip.begin(), trip.end());
  return mm;
}

SparseMatrix assemble_boundary_mass_sigma(const Mesh& m) {
  std::vector<Triplet> trip;
  for (const auto& e : m.boundary_edges) {
    if (e.tag != BoundaryTag::Sigma) continue;
    const double len = (m.vertices[e.b] - m.vertices[e.a]).norm();
    trip.emplace_back(e.a, e.a, len / 3.0);
    trip.emplace_back(e.b, e.b, len / 3.0);
    trip.emplace_back(e.a, e.b, len / 6.0);
    trip.emplace_back(e.b, e.a, len / 6.0);
  }
  SparseMatrix b(m.vertex_count(), m.vertex_count());
  b.setFromTriplets(trip.begin(), trip.end());
  return b;
}

Vector assemble_boundary_load_sigma(const Mesh& m, std::span<const double> g) {
  if (g.size() != m.sigma_loop.size()) {
    throw Error(ErrorCode::BadConfig, "boundary data size does not match the Sigma loop");
  }
  const auto pos = m.sigma_index();
  Vector load = Vector::Zero(m.vertex_count());
  for (const auto& e : m.boundary_edges) {
    if (e.tag != BoundaryTag::Sigma) continue;
    const double len = (m.vertices[e.b] - m.vertices[e.a]).norm();
    const double ga = g[pos[e.a]];
    const double gb = g[pos[e.b]];
    load[e.a] += len / 6.0 * (2.0 * ga + gb);
    load[e.b] += len / 6.0 * (ga + 2.0 * gb);
  }
  return load;
}

Vector sigma_lumped_weights(const Mesh& m) {
  Vector w = Vector::Zero(m.vertex_count());
  for (const auto& e : m.boundary_edges) {
    if (e.tag != BoundaryTag::Sigma) continue;
    const double len = (m.vertices[e.b] - m.vertices[e.a]).norm();
    w[e.a] += 0.5 * len;
    w[e.b] += 0.5 * len;
  }
  return w;
}

Operators Operators::assemble(const Mesh& m) {
  return {assemble_stiffness(m), assemble_mass(m), assemble_boundary_mass_sigma(m)};
}

ComplexFieldP1 solve_complex_robin(const Mesh& m, const SparseMatrix& stiffness,
                                   const SparseMatrix& sigma_mass, const ComplexFieldP1& rhs,
                                   const DirichletMap& dirichlet, RobinSign sign) {
  const int n = m.vertex_count();
  for (int v : m.gamma_loop) {
    if (!dirichlet.contains(v)) {
      throw Error(ErrorCode::DirichletMismatch, "Gamma node " + std::to_string(v) + " has no value");
    }
  }
  const auto gamma = m.gamma_mask();
  for (const auto& [v, value] : dirichlet) {
    if (v < 0 || v >= n || !gamma[v]) {
      throw Error(ErrorCode::DirichletMismatch, "Dirichlet value on non-Gamma node " + std::to_string(v));
    }
  }
  const FreeIndex idx(n, dirichlet);
  const int nf = idx.size();
  const double s = static_cast<double>(static_cast<int>(sign));

  Vector b(2 * nf);
  for (int k = 0; k < nf; ++k) {
    b[k] = rhs.re[idx.nodes[k]];
    b[nf + k] = rhs.im[idx.nodes[k]];
  }
  std::vector<Triplet> trip;
  trip.reserve(2 * stiffness.nonZeros() + 2 * sigma_mass.nonZeros());
  for (int col = 0; col < stiffness.outerSize(); ++col) {
    const int fc = idx.of[col];
    for (SparseMatrix::InnerIterator it(stiffness, col); it; ++it) {
      const int fr = idx.of[it.row()];
      if (fr < 0) continue;
      if (fc >= 0) {
        trip.emplace_back(fr, fc, it.value());
        trip.emplace_back(nf + fr, nf + fc, it.value());
      } else {
        const Complex g = dirichlet.at(col);
        b[fr] -= it.value() * g.real();
        b[nf + fr] -= it.value() * g.imag();
      }
    }
  }
  for (int col = 0; col < sigma_mass.outerSize(); ++col) {
    const int fc = idx.of[col];
    for (SparseMatrix::InnerIterator it(sigma_mass, col); it; ++it) {
      const int fr = idx.of[it.row()];
      if (fr < 0) continue;
      const double sb = s * it.value();
      if (fc >= 0) {
        trip.emplace_back(fr, nf + fc, -sb);
        trip.emplace_back(nf + fr, fc, sb);
      } else {
        const Complex g = dirichlet.at(col);
        b[fr] += sb * g.imag();
        b[nf + fr] -= sb * g.real();
      }
    }
  }
  SparseMatrix a(2 * nf, 2 * nf);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "complex Robin factorization failed");
  const Vector x = refined_solve(lu, a, b);

  ComplexFieldP1 u(n);
  for (int k = 0; k < nf; ++k) {
    u.re[idx.nodes[k]] = x[k];
    u.im[idx.nodes[k]] = x[nf + k];
  }
  for (const auto& [v, value] : dirichlet) {
    u.re[v] = value.real();
    u.im[v] = value.imag();
  }
  return u;
}

namespace {

// Factorizes the reduced SPD matrix once; solves any number of right-hand sides.
class ReducedSpdSolver {
 public:
  ReducedSpdSolver(const SparseMatrix& a, const RealDirichletMap& dirichlet)
      : a_(a), dirichlet_(dirichlet), idx_(static_cast<int>(a.rows()), dirichlet) {
    Vector dummy = Vector::Zero(a.rows());
    reduced_ = reduce_real(a, dummy, dirichlet, idx_).first;
    reduced_.makeCompressed();
    ldlt_.compute(reduced_);
    if (ldlt_.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "SPD factorization failed");
  }

  Vector solve(const Vector& rhs) const {
    Vector b(idx_.size());
    for (int k = 0; k < idx_.size(); ++k) b[k] = rhs[idx_.nodes[k]];
    if (!dirichlet_.empty()) {
      Vector g = Vector::Zero(a_.rows());
      for (const auto& [v, value] : dirichlet_) g[v] = value;
      const Vector ag = a_ * g;
      for (int k = 0; k < idx_.size(); ++k) b[k] -= ag[idx_.nodes[k]];
    }
    const Vector x = refined_solve(ldlt_, reduced_, b);
    Vector out = Vector::Zero(a_.rows());
    for (int k = 0; k < idx_.size(); ++k) out[idx_.nodes[k]] = x[k];
    for (const auto& [v, value] : dirichlet_) out[v] = value;
    return out;
  }

 private:
  const SparseMatrix& a_;
  const RealDirichletMap& dirichlet_;
  FreeIndex idx_;
  SparseMatrix reduced_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

}  // namespace

Vector solve_real_dirichlet(const SparseMatrix& a, const Vector& rhs, const RealDirichletMap& dirichlet) {
  return ReducedSpdSolver(a, dirichlet).solve(rhs);
}

DescentField solve_vector_h1(const Mesh& m, const Operators& ops, std::span<const Vec2> source_on_sigma) {
  if (source_on_sigma.size() != m.sigma_loop.size()) {
    throw Error(ErrorCode::BadConfig, "Sigma source size does not match the Sigma loop");
  }
  const int n = m.vertex_count();
  const SparseMatrix h1 = ops.stiffness + ops.mass;
  RealDirichletMap zero_on_gamma;
  for (int v : m.gamma_loop) zero_on_gamma.emplace(v, 0.0);

  const Vector w = sigma_lumped_weights(m);
  Vector load_x = Vector::Zero(n), load_y = Vector::Zero(n);
  for (int k = 0; k < m.sigma_count(); ++k) {
    const int v = m.sigma_loop[k];
    load_x[v] = w[v] * source_on_sigma[k].x();
    load_y[v] = w[v] * source_on_sigma[k].y();
  }
  const ReducedSpdSolver solver(h1, zero_on_gamma);
  const Vector vx = solver.solve(load_x);
  const Vector vy = solver.solve(load_y);

  DescentField out;
  out.values.resize(n);
  for (int v = 0; v < n; ++v) out.values[v] = Vec2(vx[v], vy[v]);
  out.h1_norm = std::sqrt(std::max(0.0, vx.dot(h1 * vx) + vy.dot(h1 * vy)));
  return out;
}

DescentField solve_vector_h1(const Mesh& m, std::span<const Vec2> source_on_sigma) {
  return solve_vector_h1(m, Operators::assemble(m), source_on_sigma);
}

double h1_inner(const Operators& ops, std::span<const Vec2> v, std::span<const Vec2> w) {
  const Eigen::Index n = static_cast<Eigen::Index>(v.size());
  Vector vx(n), vy(n), wx(n), wy(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    vx[i] = v[i].x();
    vy[i] = v[i].y();
    wx[i] = w[i].x();
    wy[i] = w[i].y();
  }
  return vx.dot(ops.stiffness * wx + ops.mass * wx) + vy.dot(ops.stiffness * wy + ops.mass * wy);
}

void write_matrix(std::ostream& os, const SparseMatrix& a) {
  for (int col = 0; col < a.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(a, col); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
}

}  // namespace ccbm

#include "ccbm/ccbm_core.hpp"

#include <cmath>
#include <iostream>
#include <unordered_map>

#include "ccbm/errors.hpp"
#include "ccbm/mesh_io.hpp"

namespace ccbm {

namespace {

using Triplet = Eigen::Triplet<double>;

SigmaTraces sample_sigma(const Mesh& m, const ComplexFieldP1& f) {
  SigmaTraces t;
  const int ns = m.sigma_count();
  t.re.resize(ns);
  t.im.resize(ns);
  for (int k = 0; k < ns; ++k) {
    t.re[k] = f.re[m.sigma_loop[k]];
    t.im[k] = f.im[m.sigma_loop[k]];
  }
  const Polyline sigma = sigma_polyline(m);
  t.ds_re = tangential_derivative(sigma, t.re);
  t.ds_im = tangential_derivative(sigma, t.im);
  return t;
}

// Local matrix of int A grad phi_i . grad phi_j with A = (div V) I - DV - DV^T.
struct ElementVelocity {
  ElementGeometry geom;
  Eigen::Matrix2d jacobian;  // DV
  double divergence = 0.0;
};

ElementVelocity element_velocity(const Mesh& m, int t, std::span<const Vec2> velocity) {
  ElementVelocity ev;
  ev.geom = element_geometry(m, t);
  Eigen::Matrix<double, 2, 3> vals;
  for (int i = 0; i < 3; ++i) vals.col(i) = velocity[m.triangles[t][i]];
  ev.jacobian = vals * ev.geom.grad.transpose();
  ev.divergence = ev.jacobian.trace();
  return ev;
}

}  // namespace

GradientDensity::GradientDensity(std::vector<double> values, std::vector<int> sigma_loop,
                                 const BoundaryGeometry& geom)
    : values_(std::move(values)), sigma_loop_(std::move(sigma_loop)) {
  weighted_normals_.resize(values_.size());
  for (std::size_t k = 0; k < values_.size(); ++k) weighted_normals_[k] = geom.weights[k] * geom.normals[k];
}

double GradientDensity::max_abs() const {
  double r = 0.0;
  for (double g : values_) r = std::max(r, std::abs(g));
  return r;
}

double GradientDensity::operator()(std::span<const Vec2> velocity) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k)
    sum += values_[k] * weighted_normals_[k].dot(velocity[sigma_loop_[k]]);
  return sum;
}

std::vector<double> tangential_derivative(const Polyline& sigma, std::span<const double> values) {
  const std::size_t n = sigma.size();
  std::vector<double> d(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t prev = (k + n - 1) % n;
    const std::size_t next = (k + 1) % n;
    const double len = (sigma[k] - sigma[prev]).norm() + (sigma[next] - sigma[k]).norm();
    d[k] = (values[next] - values[prev]) / len;
  }
  return d;
}

StateSolution solve_state(const Mesh& m, const Operators& ops, double lambda, RobinSign sign) {
  if (lambda >= 0.0) {
    std::clog << "warning: lambda = " << lambda << " is not negative; solving anyway\n";
  }
  const int n = m.vertex_count();
  std::vector<double> ones(m.sigma_count(), 1.0);
  ComplexFieldP1 rhs(n);
  rhs.re = lambda * assemble_boundary_load_sigma(m, ones);
  DirichletMap dirichlet;
  for (int v : m.gamma_loop) dirichlet.emplace(v, Complex(1.0, 0.0));

  StateSolution s;
  s.lambda = lambda;
  s.u = solve_complex_robin(m, ops.stiffness, ops.sigma_mass, rhs, dirichlet, sign);
  s.sigma = sample_sigma(m, s.u);
  // d_n u = lambda - s i u on Sigma
  const double sg = static_cast<double>(static_cast<int>(sign));
  const int ns = m.sigma_count();
  s.sigma.dn_re.resize(ns);
  s.sigma.dn_im.resize(ns);
  for (int k = 0; k < ns; ++k) {
    s.sigma.dn_re[k] = lambda + sg * s.sigma.im[k];
    s.sigma.dn_im[k] = -sg * s.sigma.re[k];
  }
  return s;
}

StateSolution solve_state(const Mesh& m, double lambda) {
  return solve_state(m, Operators::assemble(m), lambda);
}

AdjointSolution solve_adjoint(const Mesh& m, const Operators& ops, const StateSolution& s) {
  const int n = m.vertex_count();
  ComplexFieldP1 rhs(n);
  rhs.re = ops.mass * s.u.im;
  DirichletMap dirichlet;
  for (int v : m.gamma_loop) dirichlet.emplace(v, Complex(0.0, 0.0));

  AdjointSolution a;
  a.p = solve_complex_robin(m, ops.stiffness, ops.sigma_mass, rhs, dirichlet, RobinSign::Minus);
  a.sigma = sample_sigma(m, a.p);
  // d_n p = i p
  const int ns = m.sigma_count();
  a.sigma.dn_re.resize(ns);
  a.sigma.dn_im.resize(ns);
  for (int k = 0; k < ns; ++k) {
    a.sigma.dn_re[k] = -a.sigma.im[k];
    a.sigma.dn_im[k] = a.sigma.re[k];
  }
  return a;
}

AdjointSolution solve_adjoint(const Mesh& m, const StateSolution& s) {
  return solve_adjoint(m, Operators::assemble(m), s);
}

double cost(const SparseMatrix& mass, const StateSolution& s) {
  return 0.5 * s.u.im.dot(mass * s.u.im);
}

double cost(const Mesh& m, const StateSolution& s) { return cost(assemble_mass(m), s); }

GradientDensity gradient_density(const Mesh& m, const StateSolution& s, const AdjointSolution& a,
                                 const BoundaryGeometry& geom, double lambda) {
  const int ns = m.sigma_count();
  if (static_cast<int>(geom.size()) != ns || static_cast<int>(s.sigma.re.size()) != ns ||
      static_cast<int>(a.sigma.re.size()) != ns) {
    throw Error(ErrorCode::MissingGeometry, "Sigma geometry or traces do not match the mesh");
  }
  std::vector<double> g(ns);
  for (int k = 0; k < ns; ++k) {
    const double u1 = s.sigma.re[k], u2 = s.sigma.im[k];
    const double p1 = a.sigma.re[k], p2 = a.sigma.im[k];
    const double kappa = geom.curvature[k];
    const double bracket = a.sigma.ds_re[k] * s.sigma.ds_im[k] - a.sigma.ds_im[k] * s.sigma.ds_re[k] +
                           p1 * (s.sigma.dn_re[k] + kappa * u1) + p2 * (s.sigma.dn_im[k] + kappa * u2) +
                           lambda * kappa * p2;
    g[k] = 0.5 * u2 * u2 - bracket;
  }
  return GradientDensity(std::move(g), m.sigma_loop, geom);
}

std::vector<double> sigma_edge_divergence(const Mesh& m, std::span<const Vec2> velocity) {
  std::unordered_map<std::uint64_t, int> owner;
  auto key = [](int a, int b) {
    return (static_cast<std::uint64_t>(std::min(a, b)) << 32) | static_cast<std::uint64_t>(std::max(a, b));
  };
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto& tri = m.triangles[t];
    for (int i = 0; i < 3; ++i) owner[key(tri[i], tri[(i + 1) % 3])] = t;
  }
  const int ns = m.sigma_count();
  std::vector<double> div(ns);
  for (int k = 0; k < ns; ++k) {
    const int a = m.sigma_loop[k];
    const int b = m.sigma_loop[(k + 1) % ns];
    const Vec2 tau = (m.vertices[b] - m.vertices[a]).normalized();
    const Vec2 nrm(tau.y(), -tau.x());
    const auto ev = element_velocity(m, owner.at(key(a, b)), velocity);
    div[k] = ev.divergence - nrm.dot(ev.jacobian * nrm);
  }
  return div;
}

ComplexFieldP1 solve_material_derivative(const Mesh& m, const Operators& ops, const StateSolution& s,
                                         std::span<const Vec2> velocity) {
  const int n = m.vertex_count();
  ComplexFieldP1 rhs(n);
  // -int A grad u . grad v
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto ev = element_velocity(m, t, velocity);
    const Eigen::Matrix2d a =
        ev.divergence * Eigen::Matrix2d::Identity() - ev.jacobian - ev.jacobian.transpose();
    const Eigen::Matrix3d local = ev.geom.area * (ev.geom.grad.transpose() * a * ev.geom.grad);
    const auto& tri = m.triangles[t];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        rhs.re[tri[i]] -= local(i, j) * s.u.re[tri[j]];
        rhs.im[tri[i]] -= local(i, j) * s.u.im[tri[j]];
      }
    }
  }
  // -i int_Sigma (div_Sigma V) u v + lambda int_Sigma (div_Sigma V) v
  const auto div = sigma_edge_divergence(m, velocity);
  const int ns = m.sigma_count();
  for (int k = 0; k < ns; ++k) {
    const int a = m.sigma_loop[k];
    const int b = m.sigma_loop[(k + 1) % ns];
    const double w = div[k] * (m.vertices[b] - m.vertices[a]).norm();
    const Complex ua = s.u.at(a), ub = s.u.at(b);
    const Complex ma = w / 6.0 * (2.0 * ua + ub);
    const Complex mb = w / 6.0 * (ua + 2.0 * ub);
    const Complex ia = Complex(0.0, -1.0) * ma + s.lambda * w / 2.0;
    const Complex ib = Complex(0.0, -1.0) * mb + s.lambda * w / 2.0;
    rhs.re[a] += ia.real();
    rhs.im[a] += ia.imag();
    rhs.re[b] += ib.real();
    rhs.im[b] += ib.imag();
  }
  DirichletMap dirichlet;
  for (int v : m.gamma_loop) dirichlet.emplace(v, Complex(0.0, 0.0));
  return solve_complex_robin(m, ops.stiffness, ops.sigma_mass, rhs, dirichlet, RobinSign::Plus);
}

ComplexFieldP1 solve_material_derivative(const Mesh& m, const StateSolution& s, std::span<const Vec2> velocity) {
  return solve_material_derivative(m, Operators::assemble(m), s, velocity);
}

double volume_form_derivative(const Mesh& m, const Operators& ops, const StateSolution& s,
                              const ComplexFieldP1& udot, std::span<const Vec2> velocity) {
  double first = 0.0;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto ev = element_velocity(m, t, velocity);
    const auto& tri = m.triangles[t];
    const Eigen::Vector3d u2(s.u.im[tri[0]], s.u.im[tri[1]], s.u.im[tri[2]]);
    // u2^T M_T u2 with M_T = area/12 (1 + I)
    const double sq = ev.geom.area / 12.0 * (u2.squaredNorm() + u2.sum() * u2.sum());
    first += 0.5 * ev.divergence * sq;
  }
  return first + s.u.im.dot(ops.mass * udot.im);
}

void write_sigma_trace(std::ostream& os, const Mesh& m, const StateSolution& s, const AdjointSolution& a,
                       const BoundaryGeometry& geom, const GradientDensity& g) {
  double arc = 0.0;
  const int ns = m.sigma_count();
  for (int k = 0; k < ns; ++k) {
    const Vec2& x = m.vertices[m.sigma_loop[k]];
    os << format_double(arc) << ' ' << format_double(x.x()) << ' ' << format_double(x.y()) << ' '
       << format_double(s.sigma.re[k]) << ' ' << format_double(s.sigma.im[k]) << ' '
       << format_double(a.sigma.re[k]) << ' ' << format_double(a.sigma.im[k]) << ' '
       << format_double(geom.curvature[k]) << ' ' << format_double(g.values()[k]) << '\n';
    arc += (m.vertices[m.sigma_loop[(k + 1) % ns]] - x).norm();
  }
}

}  // namespace ccbm

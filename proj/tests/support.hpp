#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ccbm/errors.hpp"
#include "ccbm/fem.hpp"
#include "ccbm/mesh.hpp"

namespace testing {

using ccbm::Vec2;

inline constexpr double kPi = 3.14159265358979323846;

template <class F>
std::optional<ccbm::ErrorCode> error_code_of(F&& f) {
  try {
    f();
  } catch (const ccbm::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline ccbm::Mesh annulus_mesh(double h, double outer = 1.25, double inner = 0.5) {
  return ccbm::generate_annular_mesh(ccbm::FixedBoundarySpec::circle(inner), outer, h);
}

/// Unit square split along the diagonal (0,0)-(1,1). No Gamma, no Sigma.
inline ccbm::Mesh unit_square_two_triangles() {
  ccbm::Mesh m;
  m.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

/// Coefficients (a, b) of u = a + b log(rho) from the two boundary conditions
///   a + b log r = 1,   b / R + i (a + b log R) = lambda,
/// solved by Cramer's rule.
struct RadialOracle {
  std::complex<double> a, b;

  RadialOracle(double r, double R, double lambda) {
    using C = std::complex<double>;
    const C i(0.0, 1.0);
    // [1, log r; i, 1/R + i log R] [a; b] = [1; lambda]
    const C m11 = 1.0, m12 = std::log(r), m21 = i, m22 = 1.0 / R + i * std::log(R);
    const C det = m11 * m22 - m12 * m21;
    a = (1.0 * m22 - m12 * lambda) / det;
    b = (m11 * lambda - m21 * 1.0) / det;
  }

  std::complex<double> operator()(const Vec2& x) const { return a + b * std::log(x.norm()); }
};

/// sqrt(e^T M e) of a real nodal vector.
inline double mass_norm(const ccbm::SparseMatrix& mass, const ccbm::Vector& e) {
  return std::sqrt(std::max(0.0, e.dot(mass * e)));
}

inline std::vector<Vec2> random_field(int n, unsigned seed, double scale = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  std::vector<Vec2> v(n);
  for (auto& x : v) x = Vec2(dist(gen), dist(gen));
  return v;
}

inline ccbm::Vector random_vector(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ccbm::Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

/// Smooth field vanishing on Gamma: the radial profile (rho - r)/(R - r)
/// times a low Fourier mode in angle. Used as an admissible velocity.
inline std::vector<Vec2> smooth_velocity(const ccbm::Mesh& m, double r, double R, int mode, double amp = 1.0) {
  std::vector<Vec2> v(m.vertex_count(), Vec2::Zero());
  const auto gamma = m.gamma_mask();
  for (int k = 0; k < m.vertex_count(); ++k) {
    if (gamma[k]) continue;
    const Vec2& x = m.vertices[k];
    const double rho = x.norm();
    const double th = std::atan2(x.y(), x.x());
    const double ramp = std::clamp((rho - r) / (R - r), 0.0, 1.0);
    v[k] = amp * ramp * (1.0 + 0.5 * std::cos(mode * th)) * x / rho;
  }
  return v;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ccbm_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing

#include "ccbm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "ccbm/delaunay.hpp"
#include "ccbm/errors.hpp"

namespace ccbm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double wrap_angle(double a) {
  while (a <= -std::numbers::pi) a += kTwoPi;
  while (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

std::uint64_t edge_key(int a, int b) {
  auto lo = static_cast<std::uint64_t>(std::min(a, b));
  auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

Vec2 ribbon_point(double t) {
  return {0.45 * std::cos(t), 0.3 * std::sin(t) * (1.25 + std::cos(2.0 * t))};
}

// Cumulative arc length of the ribbon sampled at `samples` uniform parameters.
std::vector<double> ribbon_arc_table(int samples) {
  std::vector<double> s(samples + 1, 0.0);
  Vec2 prev = ribbon_point(0.0);
  for (int k = 1; k <= samples; ++k) {
    Vec2 cur = ribbon_point(kTwoPi * k / samples);
    s[k] = s[k - 1] + (cur - prev).norm();
    prev = cur;
  }
  return s;
}

constexpr int kRibbonSamples = 1 << 16;
constexpr double kLatticeClearance = 0.6;    // lattice points closer than this * h to a loop are dropped
constexpr double kSmoothingClearance = 0.35;  // smoothing never moves points closer than this * h
constexpr int kSmoothingRounds = 8;
constexpr int kMaxSegmentSplits = 8;

// Checks that the polar angle around `center` increases strictly along `p`
// and winds exactly once.
void require_star_shaped(const Polyline& p, const Vec2& center) {
  double total = 0.0;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 a = p[i] - center;
    Vec2 b = p[(i + 1) % n] - center;
    if (a.norm() == 0.0) {
      throw Error(ErrorCode::StarShapeViolation, "star center lies on the fixed boundary");
    }
    double d = wrap_angle(std::atan2(b.y(), b.x()) - std::atan2(a.y(), a.x()));
    if (d <= 0.0) {
      std::ostringstream msg;
      msg << "ray from (" << center.x() << ", " << center.y()
          << ") crosses the fixed boundary more than once near vertex " << i;
      throw Error(ErrorCode::StarShapeViolation, msg.str());
    }
    total += d;
  }
  if (std::abs(total - kTwoPi) > 1e-8) {
    throw Error(ErrorCode::StarShapeViolation, "fixed boundary does not wind once around the star center");
  }
}

double triangle_aspect(const Vec2& p, const Vec2& q, const Vec2& r) {
  const double area = 0.5 * cross(q - p, r - p);
  if (!(area > 0.0)) return std::numeric_limits<double>::infinity();
  const double la = (q - r).norm(), lb = (r - p).norm(), lc = (p - q).norm();
  const double s = 0.5 * (la + lb + lc);
  return la * lb * lc * s / (8.0 * area * area);
}

}  // namespace

std::vector<bool> Mesh::gamma_mask() const {
  std::vector<bool> mask(vertices.size(), false);
  for (int v : gamma_loop) mask[v] = true;
  return mask;
}

std::vector<int> Mesh::sigma_index() const {
  std::vector<int> idx(vertices.size(), -1);
  for (int k = 0; k < sigma_count(); ++k) idx[sigma_loop[k]] = k;
  return idx;
}

FixedBoundarySpec FixedBoundarySpec::circle(double r, Vec2 center) {
  FixedBoundarySpec s;
  s.kind = Kind::Circle;
  s.radius = r;
  s.star_center = center;
  return s;
}

FixedBoundarySpec FixedBoundarySpec::lshape() {
  Polyline corners = {{-0.25, -0.25}, {0.25, -0.25}, {0.25, 0.0},
                      {0.0, 0.0},     {0.0, 0.25},   {-0.25, 0.25}};
  return polygon(std::move(corners), Vec2(-0.05, -0.05));
}

FixedBoundarySpec FixedBoundarySpec::ribbon() {
  FixedBoundarySpec s;
  s.kind = Kind::Ribbon;
  s.star_center = Vec2::Zero();
  return s;
}

FixedBoundarySpec FixedBoundarySpec::polygon(Polyline corners, Vec2 star_center) {
  FixedBoundarySpec s;
  s.kind = Kind::Polygon;
  s.corners = std::move(corners);
  s.star_center = star_center;
  return s;
}

double FixedBoundarySpec::perimeter() const {
  switch (kind) {
    case Kind::Circle: return kTwoPi * radius;
    case Kind::Ribbon: return ribbon_arc_table(kRibbonSamples).back();
    case Kind::Polygon: return ccbm::perimeter(corners);
  }
  return 0.0;
}

Polyline FixedBoundarySpec::discretize(int n) const {
  Polyline out;
  out.reserve(n);
  switch (kind) {
    case Kind::Circle:
      return circle_polyline(radius, n, star_center);
    case Kind::Ribbon: {
      const auto table = ribbon_arc_table(kRibbonSamples);
      const double total = table.back();
      std::size_t seg = 0;
      for (int k = 0; k < n; ++k) {
        const double target = total * k / n;
        while (seg + 1 < table.size() && table[seg + 1] < target) ++seg;
        const double span = table[seg + 1] - table[seg];
        const double frac = span > 0.0 ? (target - table[seg]) / span : 0.0;
        out.push_back(ribbon_point(kTwoPi * (seg + frac) / kRibbonSamples));
      }
      return out;
    }
    case Kind::Polygon: {
      const std::size_t ne = corners.size();
      if (ne < 3 || n < static_cast<int>(ne)) {
        throw Error(ErrorCode::BadConfig, "polygon needs at least as many vertices as corners");
      }
      const double total = ccbm::perimeter(corners);
      std::vector<double> raw(ne);
      std::vector<int> count(ne);
      int sum = 0;
      for (std::size_t e = 0; e < ne; ++e) {
        raw[e] = n * (corners[(e + 1) % ne] - corners[e]).norm() / total;
        count[e] = std::max(1, static_cast<int>(std::floor(raw[e])));
        sum += count[e];
      }
      // largest-remainder balancing, ties broken by edge order
      while (sum < n) {
        std::size_t best = 0;
        for (std::size_t e = 1; e < ne; ++e)
          if (raw[e] - count[e] > raw[best] - count[best]) best = e;
        ++count[best];
        ++sum;
      }
      while (sum > n) {
        std::size_t best = ne;
        for (std::size_t e = 0; e < ne; ++e) {
          if (count[e] <= 1) continue;
          if (best == ne || raw[e] - count[e] < raw[best] - count[best]) best = e;
        }
        --count[best];
        --sum;
      }
      for (std::size_t e = 0; e < ne; ++e) {
        const Vec2& a = corners[e];
        const Vec2& b = corners[(e + 1) % ne];
        for (int k = 0; k < count[e]; ++k) out.push_back(a + (b - a) * (double(k) / count[e]));
      }
      return out;
    }
  }
  return out;
}

namespace {

bool inside_polygon(const Vec2& x, const Polyline& p) {
  bool inside = false;
  for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
    const Vec2& a = p[i];
    const Vec2& b = p[j];
    if ((a.y() > x.y()) != (b.y() > x.y()) &&
        x.x() < (b.x() - a.x()) * (x.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      inside = !inside;
    }
  }
  return inside;
}

// Triangulation of gamma, sigma and interior points (in that order) restricted
// to the region between the two loops. Segments absent from the Delaunay
// triangulation are split and the triangulation is redone.
std::vector<std::array<int, 3>> conforming_triangles(Polyline& gamma, Polyline& sigma, double outer_radius,
                                                     const std::vector<Vec2>& interior) {
  for (int attempt = 0; attempt < kMaxSegmentSplits; ++attempt) {
    const int ng = static_cast<int>(gamma.size()), ns = static_cast<int>(sigma.size());
    std::vector<Vec2> pts;
    pts.reserve(ng + ns + interior.size());
    pts.insert(pts.end(), gamma.begin(), gamma.end());
    pts.insert(pts.end(), sigma.begin(), sigma.end());
    pts.insert(pts.end(), interior.begin(), interior.end());
    std::vector<std::array<int, 3>> tris;
    std::unordered_map<std::uint64_t, int> edges;
    for (const auto& t : delaunay_triangulation(pts)) {
      const Vec2 centroid = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
      if (inside_polygon(centroid, gamma)) continue;
      tris.push_back(t);
      for (int k = 0; k < 3; ++k) ++edges[edge_key(t[k], t[(k + 1) % 3])];
    }
    auto present = [&](int a, int b) { return edges.count(edge_key(a, b)) > 0; };
    Polyline g2, s2;
    bool split = false;
    for (int i = 0; i < ng; ++i) {
      g2.push_back(gamma[i]);
      if (!present(i, (i + 1) % ng)) {
        g2.push_back(0.5 * (gamma[i] + gamma[(i + 1) % ng]));
        split = true;
      }
    }
    for (int i = 0; i < ns; ++i) {
      s2.push_back(sigma[i]);
      if (!present(ng + i, ng + (i + 1) % ns)) {
        const Vec2 mid = 0.5 * (sigma[i] + sigma[(i + 1) % ns]);
        s2.push_back(outer_radius * mid.normalized());
        split = true;
      }
    }
    if (!split) return tris;
    gamma = std::move(g2);
    sigma = std::move(s2);
  }
  throw Error(ErrorCode::DegenerateTriangle, "boundary segments could not be recovered in the triangulation");
}

}  // namespace

Mesh generate_annular_mesh(const FixedBoundarySpec& inner, double outer_radius, double h,
                           const MeshOptions& options) {
  if (!(h > 0.0)) throw Error(ErrorCode::BadConfig, "mesh size h must be positive");
  const Vec2 c = inner.star_center;
  if (!(outer_radius > c.norm())) {
    throw Error(ErrorCode::GeometryOverlap, "star center lies outside the outer circle");
  }

  const int n_sigma = std::max(8, static_cast<int>(std::ceil(kTwoPi * outer_radius / h)));
  const int n_gamma = std::max(8, static_cast<int>(std::ceil(inner.perimeter() / h)));

  // dense copy first, so rays crossing between coarse vertices are caught
  const Polyline dense = inner.discretize(std::max(8 * n_gamma, 1024));
  for (const auto& p : dense) {
    if (p.norm() >= outer_radius) {
      throw Error(ErrorCode::GeometryOverlap, "fixed boundary reaches the outer circle");
    }
  }
  require_star_shaped(dense, c);
  Polyline gamma = inner.discretize(n_gamma);
  require_star_shaped(gamma, c);
  Polyline sigma = circle_polyline(outer_radius, n_sigma);

  // hexagonal lattice of spacing h, kept clear of both loops
  const double clearance = kLatticeClearance * h;
  const double dy = 0.5 * std::sqrt(3.0) * h;
  std::vector<Vec2> interior;
  const int rows = static_cast<int>(std::ceil(outer_radius / dy));
  const int cols = static_cast<int>(std::ceil(outer_radius / h)) + 1;
  for (int j = -rows; j <= rows; ++j) {
    for (int i = -cols; i <= cols; ++i) {
      const Vec2 x((i + 0.5 * (j & 1)) * h, j * dy);
      if (x.norm() > outer_radius - clearance) continue;
      if (inside_polygon(x, gamma) || distance_to_polyline(x, gamma) < clearance) continue;
      interior.push_back(x);
    }
  }

  std::vector<std::array<int, 3>> tris;
  for (int round = 0;; ++round) {
    tris = conforming_triangles(gamma, sigma, outer_radius, interior);
    if (round == kSmoothingRounds) break;
    // move interior points to their neighbor average, then retriangulate
    const int fixed = static_cast<int>(gamma.size() + sigma.size());
    std::vector<Vec2> sum(interior.size(), Vec2::Zero());
    std::vector<int> count(interior.size(), 0);
    std::vector<Vec2> all(gamma.begin(), gamma.end());
    all.insert(all.end(), sigma.begin(), sigma.end());
    all.insert(all.end(), interior.begin(), interior.end());
    for (const auto& t : tris) {
      for (int k = 0; k < 3; ++k) {
        const int a = t[k], b = t[(k + 1) % 3];
        if (a >= fixed) { sum[a - fixed] += all[b]; ++count[a - fixed]; }
        if (b >= fixed) { sum[b - fixed] += all[a]; ++count[b - fixed]; }
      }
    }
    const double keep_out = kSmoothingClearance * h;
    for (std::size_t i = 0; i < interior.size(); ++i) {
      if (count[i] == 0) continue;
      const Vec2 target = sum[i] / count[i];
      if (target.norm() > outer_radius - keep_out) continue;
      if (inside_polygon(target, gamma) || distance_to_polyline(target, gamma) < keep_out) continue;
      interior[i] = target;
    }
  }

  Mesh m;
  const int ng = static_cast<int>(gamma.size()), ns = static_cast<int>(sigma.size());
  m.vertices.insert(m.vertices.end(), gamma.begin(), gamma.end());
  m.vertices.insert(m.vertices.end(), sigma.begin(), sigma.end());
  m.vertices.insert(m.vertices.end(), interior.begin(), interior.end());
  m.triangles = std::move(tris);
  for (int i = 0; i < ng; ++i) {
    m.boundary_edges.push_back({i, (i + 1) % ng, BoundaryTag::Gamma});
    m.gamma_loop.push_back(i);
  }
  for (int i = 0; i < ns; ++i) {
    m.boundary_edges.push_back({ng + i, ng + (i + 1) % ns, BoundaryTag::Sigma});
    m.sigma_loop.push_back(ng + i);
  }
  if (options.smoothing_passes > 0) relax_interior(m, 0.0, options.smoothing_passes);
  validate_mesh(m);
  return m;
}

void validate_mesh(const Mesh& m) {
  const int nv = m.vertex_count();
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    for (int v : m.triangles[t]) {
      if (v < 0 || v >= nv) throw Error(ErrorCode::BadConfig, "triangle references a missing vertex");
    }
    if (!(signed_area(m, static_cast<int>(t)) > 0.0)) {
      throw Error(ErrorCode::MeshInversion, "triangle " + std::to_string(t) + " has non-positive area");
    }
  }
  std::unordered_map<std::uint64_t, int> edge_use;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) ++edge_use[edge_key(t[k], t[(k + 1) % 3])];
  }
  std::size_t open_edges = 0;
  for (const auto& [key, uses] : edge_use) {
    if (uses == 1) ++open_edges;
    if (uses > 2) throw Error(ErrorCode::BadConfig, "non-manifold edge");
  }
  if (open_edges != m.boundary_edges.size()) {
    throw Error(ErrorCode::BadConfig, "boundary edge list does not match the triangulation");
  }
  for (const auto& e : m.boundary_edges) {
    auto it = edge_use.find(edge_key(e.a, e.b));
    if (it == edge_use.end() || it->second != 1) {
      throw Error(ErrorCode::BadConfig, "boundary edge does not belong to exactly one triangle");
    }
  }
  std::vector<int> tag(nv, 0);
  for (int v : m.gamma_loop) tag[v] |= 1;
  for (int v : m.sigma_loop) tag[v] |= 2;
  for (int v = 0; v < nv; ++v) {
    if (tag[v] == 3) throw Error(ErrorCode::GeometryOverlap, "Gamma and Sigma share a vertex");
  }
  const Polyline sigma = sigma_polyline(m);
  if (sigma.size() < 3 || enclosed_area(sigma) <= 0.0) {
    throw Error(ErrorCode::BadConfig, "Sigma loop must be counterclockwise");
  }
  // Sigma must enclose Gamma (crossing-number test)
  for (int v : m.gamma_loop) {
    const Vec2& x = m.vertices[v];
    bool inside = false;
    for (std::size_t i = 0, j = sigma.size() - 1; i < sigma.size(); j = i++) {
      const Vec2& a = sigma[i];
      const Vec2& b = sigma[j];
      if ((a.y() > x.y()) != (b.y() > x.y()) &&
          x.x() < (b.x() - a.x()) * (x.y() - a.y()) / (b.y() - a.y()) + a.x()) {
        inside = !inside;
      }
    }
    if (!inside) throw Error(ErrorCode::GeometryOverlap, "Gamma vertex outside Sigma");
  }
}

double signed_area(const Mesh& m, int triangle) {
  const auto& t = m.triangles[triangle];
  const auto& X = m.vertices;
  return 0.5 * cross(X[t[1]] - X[t[0]], X[t[2]] - X[t[0]]);
}

Polyline sigma_polyline(const Mesh& m) {
  Polyline p;
  p.reserve(m.sigma_loop.size());
  for (int v : m.sigma_loop) p.push_back(m.vertices[v]);
  return p;
}

Polyline gamma_polyline(const Mesh& m) {
  Polyline p;
  p.reserve(m.gamma_loop.size());
  for (int v : m.gamma_loop) p.push_back(m.vertices[v]);
  return p;
}

double perimeter(const Polyline& p) {
  double len = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) len += (p[(i + 1) % p.size()] - p[i]).norm();
  return len;
}

double enclosed_area(const Polyline& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) a += cross(p[i], p[(i + 1) % p.size()]);
  return 0.5 * a;
}

Polyline circle_polyline(double radius, int n, Vec2 center) {
  Polyline p;
  p.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double a = kTwoPi * k / n;
    p.push_back(center + radius * Vec2(std::cos(a), std::sin(a)));
  }
  return p;
}

BoundaryGeometry polyline_geometry(const Polyline& p) {
  const std::size_t n = p.size();
  if (n < 3) throw Error(ErrorCode::DegenerateEdge, "boundary polyline needs at least three vertices");
  const double total = perimeter(p);
  std::vector<Vec2> tangent(n);
  std::vector<double> length(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vec2 e = p[(k + 1) % n] - p[k];
    length[k] = e.norm();
    if (!(length[k] >= 1e-12 * total)) {
      throw Error(ErrorCode::DegenerateEdge, "Sigma edge " + std::to_string(k) + " is degenerate");
    }
    tangent[k] = e / length[k];
  }
  BoundaryGeometry g;
  g.normals.resize(n);
  g.curvature.resize(n);
  g.weights.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t prev = (k + n - 1) % n;
    const Vec2& t0 = tangent[prev];
    const Vec2& t1 = tangent[k];
    // both adjacent edge normals (tangent rotated clockwise) weigh equally
    Vec2 nsum(t0.y() + t1.y(), -(t0.x() + t1.x()));
    g.normals[k] = nsum.normalized();
    const double turn = std::atan2(cross(t0, t1), t0.dot(t1));
    g.weights[k] = 0.5 * (length[prev] + length[k]);
    g.curvature[k] = turn / g.weights[k];
  }
  return g;
}

BoundaryGeometry boundary_geometry(const Mesh& m) { return polyline_geometry(sigma_polyline(m)); }

Mesh displace_vertices(const Mesh& m, std::span<const Vec2> velocity, double t) {
  Mesh out = m;
  for (int v = 0; v < m.vertex_count(); ++v) out.vertices[v] = m.vertices[v] + t * velocity[v];
  return out;
}

Mesh move_mesh(const Mesh& m, std::span<const Vec2> velocity, double t) {
  if (velocity.size() != m.vertices.size()) {
    throw Error(ErrorCode::BadConfig, "velocity field size does not match the mesh");
  }
  Mesh out = m;
  const auto fixed = m.gamma_mask();
  for (int v = 0; v < m.vertex_count(); ++v) {
    if (!fixed[v]) out.vertices[v] = m.vertices[v] + t * velocity[v];
  }
  for (std::size_t k = 0; k < out.triangles.size(); ++k) {
    if (!(signed_area(out, static_cast<int>(k)) > 0.0)) {
      throw Error(ErrorCode::MeshInversion, "triangle " + std::to_string(k) + " inverted at t = " +
                                                std::to_string(t));
    }
  }
  return out;
}

double distance_to_polyline(const Vec2& x, const Polyline& p) {
  if (p.empty()) throw Error(ErrorCode::EmptyPolyline, "distance to an empty polyline");
  if (p.size() == 1) return (x - p[0]).norm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % p.size()];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (x - (a + s * ab)).squaredNorm());
  }
  return std::sqrt(best);
}

double hausdorff_distance(const Polyline& a, const Polyline& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyPolyline, "Hausdorff distance of an empty polyline");
  double d = 0.0;
  for (const auto& x : a) d = std::max(d, distance_to_polyline(x, b));
  for (const auto& x : b) d = std::max(d, distance_to_polyline(x, a));
  return d;
}

namespace {

double aspect_of(const Mesh& m, const std::array<int, 3>& t) {
  return triangle_aspect(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
}

// One sweep of quality-improving flips of interior edges touching a triangle
// with aspect above the threshold. Returns the number of flips.
int flip_sweep(Mesh& m, double aspect_threshold) {
  std::unordered_map<std::uint64_t, std::vector<int>> owners;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) owners[edge_key(tri[k], tri[(k + 1) % 3])].push_back(t);
  }
  std::vector<bool> touched(m.triangles.size(), false);
  int flips = 0;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    if (touched[t] || !(aspect_of(m, m.triangles[t]) > aspect_threshold)) continue;
    for (int k = 0; k < 3; ++k) {
      const auto tri = m.triangles[t];
      const int a = tri[k], b = tri[(k + 1) % 3], c = tri[(k + 2) % 3];
      const auto& own = owners[edge_key(b, c)];
      if (own.size() != 2) continue;
      const int u = own[0] == t ? own[1] : own[0];
      if (touched[u]) continue;
      int d = -1;
      for (int v : m.triangles[u])
        if (v != b && v != c) d = v;
      const std::array<int, 3> t1{a, b, d}, t2{a, d, c};
      const double before = std::max(aspect_of(m, tri), aspect_of(m, m.triangles[u]));
      const double after = std::max(aspect_of(m, t1), aspect_of(m, t2));
      if (!(after < before)) continue;
      m.triangles[t] = t1;
      m.triangles[u] = t2;
      touched[t] = touched[u] = true;
      ++flips;
      break;
    }
  }
  return flips;
}

}  // namespace

namespace {

int smooth_interior(Mesh& m, double aspect_threshold, int passes) {
  const int n = m.vertex_count();
  std::vector<bool> fixed(n, false);
  for (const auto& e : m.boundary_edges) fixed[e.a] = fixed[e.b] = true;
  std::vector<std::vector<int>> star(n), nbrs(n);
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) {
      star[tri[k]].push_back(t);
      nbrs[tri[k]].push_back(tri[(k + 1) % 3]);
      nbrs[tri[k]].push_back(tri[(k + 2) % 3]);
    }
  }
  auto worst = [&](int v) {
    double w = 0.0;
    for (int t : star[v]) {
      const auto& tri = m.triangles[t];
      w = std::max(w, triangle_aspect(m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]));
    }
    return w;
  };
  int moved = 0;
  for (int pass = 0; pass < passes; ++pass) {
    int moved_this_pass = 0;
    for (int v = 0; v < n; ++v) {
      if (fixed[v] || star[v].empty()) continue;
      const double before = worst(v);
      if (!(before > aspect_threshold)) continue;
      auto& list = nbrs[v];
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
      Vec2 avg = Vec2::Zero();
      for (int w : list) avg += m.vertices[w];
      const Vec2 old = m.vertices[v];
      m.vertices[v] = avg / static_cast<double>(list.size());
      if (worst(v) < before) {
        ++moved_this_pass;
      } else {
        m.vertices[v] = old;
      }
    }
    moved += moved_this_pass;
    if (moved_this_pass == 0) break;
  }
  return moved;
}

}  // namespace

int relax_interior(Mesh& m, double aspect_threshold, int passes) {
  int changes = 0;
  for (int pass = 0; pass < passes; ++pass) {
    const int flips = flip_sweep(m, aspect_threshold);
    changes += flips;
    if (flips == 0) break;
  }
  return changes + smooth_interior(m, aspect_threshold, passes);
}

QualityReport mesh_quality(const Mesh& m) {
  QualityReport r;
  r.min_aspect = std::numeric_limits<double>::infinity();
  r.min_signed_area = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t k = 0; k < m.triangles.size(); ++k) {
    const auto& t = m.triangles[k];
    const auto& X = m.vertices;
    const double la = (X[t[1]] - X[t[2]]).norm();
    const double lb = (X[t[2]] - X[t[0]]).norm();
    const double lc = (X[t[0]] - X[t[1]]).norm();
    const double area = signed_area(m, static_cast<int>(k));
    const double s = 0.5 * (la + lb + lc);
    const double aspect = area != 0.0 ? la * lb * lc * s / (8.0 * area * area)
                                      : std::numeric_limits<double>::infinity();
    r.min_aspect = std::min(r.min_aspect, aspect);
    r.max_aspect = std::max(r.max_aspect, aspect);
    r.min_signed_area = std::min(r.min_signed_area, area);
    sum += aspect;
  }
  r.mean_aspect = m.triangles.empty() ? 0.0 : sum / static_cast<double>(m.triangles.size());
  return r;
}

}  // namespace ccbm

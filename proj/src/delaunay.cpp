#include "ccbm/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "ccbm/errors.hpp"

namespace ccbm {

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// > 0 when d lies strictly inside the circumcircle of the ccw triangle abc
double in_circle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady, bd = bdx * bdx + bdy * bdy, cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> nbr;  // nbr[k] lies across the edge opposite v[k]; -1 on the hull
  bool alive = true;
};

class Triangulator {
 public:
  explicit Triangulator(std::vector<Vec2> pts) : p_(std::move(pts)) {}

  void super_triangle(const Vec2& lo, const Vec2& hi) {
    const Vec2 mid = 0.5 * (lo + hi);
    const double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-12}) * 1e3;
    const int s = static_cast<int>(p_.size());
    p_.push_back(mid + Vec2(-2.0 * span, -span));
    p_.push_back(mid + Vec2(2.0 * span, -span));
    p_.push_back(mid + Vec2(0.0, 2.0 * span));
    tris_.push_back({{s, s + 1, s + 2}, {-1, -1, -1}, true});
  }

  void insert(int pi) {
    const Vec2& x = p_[pi];
    const int start = locate(x);
    std::vector<char> in_cavity(tris_.size(), 0);
    std::vector<int> cavity;
    std::vector<char> excluded(tris_.size(), 0);
    for (;;) {
      grow_cavity(start, x, excluded, in_cavity, cavity);
      const int bad = first_invisible_edge_owner(x, in_cavity, cavity, start);
      if (bad < 0) break;
      if (bad == start) throw Error(ErrorCode::DegenerateTriangle, "point location failed during triangulation");
      excluded[bad] = 1;
    }
    retriangulate(pi, in_cavity, cavity);
  }

  std::vector<std::array<int, 3>> result(int real_points) const {
    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= real_points || t.v[1] >= real_points || t.v[2] >= real_points) continue;
      out.push_back(t.v);
    }
    return out;
  }

 private:
  int locate(const Vec2& x) const {
    int t = last_;
    if (t < 0 || !tris_[t].alive) t = static_cast<int>(tris_.size()) - 1;
    while (!tris_[t].alive) --t;
    for (std::size_t steps = 0; steps < 4 * tris_.size() + 16; ++steps) {
      const auto& tr = tris_[t];
      int next = -1;
      for (int k = 0; k < 3; ++k) {
        if (orient(p_[tr.v[(k + 1) % 3]], p_[tr.v[(k + 2) % 3]], x) < 0.0 && tr.nbr[k] >= 0) {
          next = tr.nbr[k];
          break;
        }
      }
      if (next < 0) return t;
      t = next;
    }
    // walk cycled on a degenerate configuration; fall back to a scan
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
      const auto& tr = tris_[i];
      if (!tr.alive) continue;
      bool inside = true;
      for (int k = 0; k < 3; ++k) inside = inside && orient(p_[tr.v[(k + 1) % 3]], p_[tr.v[(k + 2) % 3]], x) >= 0.0;
      if (inside) return i;
    }
    throw Error(ErrorCode::DegenerateTriangle, "point outside the triangulation");
  }

  void grow_cavity(int start, const Vec2& x, const std::vector<char>& excluded, std::vector<char>& in_cavity,
                   std::vector<int>& cavity) const {
    for (int t : cavity) in_cavity[t] = 0;
    cavity.assign(1, start);
    in_cavity[start] = 1;
    for (std::size_t q = 0; q < cavity.size(); ++q) {
      const auto& tr = tris_[cavity[q]];
      for (int k = 0; k < 3; ++k) {
        const int n = tr.nbr[k];
        if (n < 0 || in_cavity[n] || excluded[n]) continue;
        const auto& nt = tris_[n];
        if (in_circle(p_[nt.v[0]], p_[nt.v[1]], p_[nt.v[2]], x) > 0.0) {
          in_cavity[n] = 1;
          cavity.push_back(n);
        }
      }
    }
  }

  // Owner of a cavity boundary edge that x does not see strictly from inside;
  // for the start triangle the outside neighbor is returned instead (to be absorbed).
  int first_invisible_edge_owner(const Vec2& x, std::vector<char>& in_cavity, std::vector<int>& cavity,
                                 int start) const {
    for (std::size_t q = 0; q < cavity.size(); ++q) {
      const int t = cavity[q];
      const auto& tr = tris_[t];
      for (int k = 0; k < 3; ++k) {
        const int n = tr.nbr[k];
        if (n >= 0 && in_cavity[n]) continue;
        if (orient(p_[tr.v[(k + 1) % 3]], p_[tr.v[(k + 2) % 3]], x) > 0.0) continue;
        if (t == start && n >= 0) {
          // x on an edge of its own triangle: the neighbor must join the cavity
          in_cavity[n] = 1;
          cavity.push_back(n);
          return first_invisible_edge_owner(x, in_cavity, cavity, start);
        }
        return t;
      }
    }
    return -1;
  }

  void retriangulate(int pi, const std::vector<char>& in_cavity, const std::vector<int>& cavity) {
    struct Edge {
      int a, b, outside;
    };
    std::vector<Edge> rim;
    for (int t : cavity) {
      const auto& tr = tris_[t];
      for (int k = 0; k < 3; ++k) {
        const int n = tr.nbr[k];
        if (n >= 0 && in_cavity[n]) continue;
        rim.push_back({tr.v[(k + 1) % 3], tr.v[(k + 2) % 3], n});
      }
    }
    // reuse cavity slots first
    std::vector<int> slots(cavity.begin(), cavity.end());
    for (int t : cavity) tris_[t].alive = false;
    while (slots.size() < rim.size()) {
      slots.push_back(static_cast<int>(tris_.size()));
      tris_.push_back({});
      tris_.back().alive = false;
    }
    std::unordered_map<int, int> by_start, by_end;
    for (std::size_t e = 0; e < rim.size(); ++e) {
      const int t = slots[e];
      tris_[t] = {{rim[e].a, rim[e].b, pi}, {-1, -1, rim[e].outside}, true};
      by_start[rim[e].a] = t;
      by_end[rim[e].b] = t;
      if (rim[e].outside >= 0) {
        auto& out = tris_[rim[e].outside];
        for (int k = 0; k < 3; ++k) {
          const int u = out.v[(k + 1) % 3], w = out.v[(k + 2) % 3];
          if (u == rim[e].b && w == rim[e].a) out.nbr[k] = t;
        }
      }
    }
    for (std::size_t e = 0; e < rim.size(); ++e) {
      auto& tr = tris_[slots[e]];
      tr.nbr[0] = by_start.at(rim[e].b);  // across edge (b, p)
      tr.nbr[1] = by_end.at(rim[e].a);    // across edge (p, a)
    }
    for (std::size_t e = rim.size(); e < slots.size(); ++e) tris_[slots[e]].alive = false;
    last_ = slots.front();
  }

  std::vector<Vec2> p_;
  std::vector<Tri> tris_;
  int last_ = -1;
};

}  // namespace

std::vector<std::array<int, 3>> delaunay_triangulation(const std::vector<Vec2>& points) {
  if (points.size() < 3) return {};
  Vec2 lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Triangulator tri(points);
  tri.super_triangle(lo, hi);
  for (int i = 0; i < static_cast<int>(points.size()); ++i) tri.insert(i);
  return tri.result(static_cast<int>(points.size()));
}

}  // namespace ccbm

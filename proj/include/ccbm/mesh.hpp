#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ccbm {

using Vec2 = Eigen::Vector2d;
using Polyline = std::vector<Vec2>;  // closed implicitly: last vertex connects to the first
using VectorField = std::vector<Vec2>;

enum class BoundaryTag : char { Gamma = 'G', Sigma = 'S' };

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::Gamma;
};

/// Annular triangulation: fixed inner boundary Gamma, free outer boundary Sigma.
///
/// Triangles are counterclockwise. Sigma edges are stored in the same
/// counterclockwise order as `sigma_loop`, so the outward normal of edge
/// (a, b) is the tangent rotated clockwise.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<int> sigma_loop;
  std::vector<int> gamma_loop;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int sigma_count() const { return static_cast<int>(sigma_loop.size()); }

  /// Per-vertex flag, true on Gamma nodes.
  std::vector<bool> gamma_mask() const;
  /// Per-vertex position in sigma_loop, or -1 for non-Sigma vertices.
  std::vector<int> sigma_index() const;
};

/// Closed star-shaped curve used as the fixed boundary Gamma.
struct FixedBoundarySpec {
  enum class Kind { Circle, Ribbon, Polygon };

  Kind kind = Kind::Circle;
  double radius = 0.0;    // Circle
  Polyline corners;       // Polygon, counterclockwise
  Vec2 star_center = Vec2::Zero();

  static FixedBoundarySpec circle(double r, Vec2 center = Vec2::Zero());
  /// Boundary of (-0.25,0.25)^2 \ [0,0.25]^2, star center (-0.05,-0.05).
  static FixedBoundarySpec lshape();
  /// (0.45 cos t, 0.3 sin t (1.25 + cos 2t)), star center at the origin.
  static FixedBoundarySpec ribbon();
  static FixedBoundarySpec polygon(Polyline corners, Vec2 star_center);

  double perimeter() const;
  /// `n` vertices, counterclockwise, arc-length uniform. Polygon corners are
  /// always kept as vertices.
  Polyline discretize(int n) const;
};

struct MeshOptions {
  int smoothing_passes = 0;
};

Mesh generate_annular_mesh(const FixedBoundarySpec& inner, double outer_radius, double h,
                           const MeshOptions& options = {});

/// Throws on any violated Mesh invariant (used by tests and the mesh loader).
void validate_mesh(const Mesh& m);

double signed_area(const Mesh& m, int triangle);

Polyline sigma_polyline(const Mesh& m);
Polyline gamma_polyline(const Mesh& m);
double perimeter(const Polyline& p);
double enclosed_area(const Polyline& p);
Polyline circle_polyline(double radius, int n, Vec2 center = Vec2::Zero());

struct BoundaryGeometry {
  std::vector<Vec2> normals;     // outward unit normal per Sigma vertex
  std::vector<double> curvature; // turning angle / mean adjacent edge length
  std::vector<double> weights;   // half the adjacent edge lengths

  std::size_t size() const { return normals.size(); }
};

/// Geometry of a closed counterclockwise polyline.
BoundaryGeometry polyline_geometry(const Polyline& p);
/// Geometry of the Sigma loop, indexed like `m.sigma_loop`.
BoundaryGeometry boundary_geometry(const Mesh& m);

/// x + t V(x) at every vertex, no validity check.
Mesh displace_vertices(const Mesh& m, std::span<const Vec2> velocity, double t);
/// As displace_vertices, but Gamma nodes are left untouched and any
/// non-positive triangle raises MeshInversion.
Mesh move_mesh(const Mesh& m, std::span<const Vec2> velocity, double t);

/// Symmetric Hausdorff distance from vertex-to-segment distances in both directions.
double hausdorff_distance(const Polyline& a, const Polyline& b);
/// Distance from a point to a closed polyline.
double distance_to_polyline(const Vec2& x, const Polyline& p);

struct QualityReport {
  double min_aspect = 0.0;
  double mean_aspect = 0.0;
  double max_aspect = 0.0;
  double min_signed_area = 0.0;
  bool inverted() const { return min_signed_area <= 0.0; }
};

/// Local repair of triangles with aspect above `aspect_threshold`: flips of
/// interior edges, then Laplacian moves of interior vertices, each kept only
/// if it lowers the worst aspect involved. Boundary vertices and boundary
/// edges never change. Returns the number of flips and moves.
int relax_interior(Mesh& m, double aspect_threshold, int passes);

/// Aspect ratio is circumradius / (2 inradius): 1 for equilateral triangles.
QualityReport mesh_quality(const Mesh& m);

}  // namespace ccbm

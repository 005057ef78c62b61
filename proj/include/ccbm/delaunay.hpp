#pragma once

#include <array>
#include <vector>

#include "ccbm/mesh.hpp"

namespace ccbm {

/// Delaunay triangulation of the convex hull of `points` (Bowyer-Watson).
/// Triangles are counterclockwise. Insertion follows the input order, so the
/// result is deterministic; degenerate in-circle ties keep a valid, possibly
/// non-Delaunay, triangulation.
std::vector<std::array<int, 3>> delaunay_triangulation(const std::vector<Vec2>& points);

}  // namespace ccbm

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ccbm/mesh.hpp"

namespace ccbm {

// Snapshot format:
//   vertices N triangles M boundary K
//   x y                (N lines)
//   i j k              (M lines, 0-based)
//   i j tag            (K lines, tag G or S)
void write_mesh(std::ostream& os, const Mesh& m);
Mesh read_mesh(std::istream& is);
void write_mesh(const std::filesystem::path& path, const Mesh& m);
Mesh read_mesh(const std::filesystem::path& path);

// One "x y" pair per line.
void write_polyline(std::ostream& os, const Polyline& p);
Polyline read_polyline(std::istream& is);
void write_polyline(const std::filesystem::path& path, const Polyline& p);

/// Shortest round-trip representation, locale independent.
std::string format_double(double v, int significant_digits = 17);

}  // namespace ccbm

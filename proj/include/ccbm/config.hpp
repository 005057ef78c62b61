#pragma once

#include <filesystem>
#include <iosfwd>

#include "ccbm/scenario.hpp"

namespace ccbm {

// Config files hold "key = value" lines; '#' starts a comment. Keys are
// applied on top of `base`, or on top of the preset named by a "scenario" key.
// Polygons are written as "x0 y0, x1 y1, ..." and star_center as "x y".
Scenario parse_config(std::istream& is, const Scenario& base = {});
Scenario load_config(const std::filesystem::path& path, const Scenario& base = {});

MethodSelection parse_method(const std::string& s);

}  // namespace ccbm

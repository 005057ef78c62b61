#include "ccbm/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "ccbm/errors.hpp"

namespace ccbm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw Error(ErrorCode::BadConfig, key + ": not a number: '" + v + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw Error(ErrorCode::BadConfig, key + ": not an integer: '" + v + "'");
  }
  return out;
}

Vec2 to_point(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  std::string xs, ys, extra;
  if (!(is >> xs >> ys) || (is >> extra)) throw Error(ErrorCode::BadConfig, key + ": expected 'x y'");
  return {to_double(key, xs), to_double(key, ys)};
}

Polyline to_polygon(const std::string& key, const std::string& v) {
  Polyline p;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) p.push_back(to_point(key, trim(item)));
  if (p.size() < 3) throw Error(ErrorCode::BadConfig, key + ": need at least 3 corners");
  return p;
}

void apply(Scenario& s, const std::string& key, const std::string& v) {
  if (key == "name") s.name = v;
  else if (key == "boundary") {
    if (v != "circle" && v != "lshape" && v != "ribbon" && v != "polygon")
      throw Error(ErrorCode::BadConfig, "boundary: unknown kind '" + v + "'");
    s.boundary = v;
  }
  else if (key == "inner_radius") s.inner_radius = to_double(key, v);
  else if (key == "polygon") s.polygon = to_polygon(key, v);
  else if (key == "star_center") s.star_center = to_point(key, v);
  else if (key == "lambda") s.lambda = to_double(key, v);
  else if (key == "target_radius") s.target_radius = to_double(key, v);
  else if (key == "initial_sigma_radius") s.initial_sigma_radius = to_double(key, v);
  else if (key == "h") s.h = to_double(key, v);
  else if (key == "mu") s.cfg.mu = to_double(key, v);
  else if (key == "tol") s.cfg.tol = to_double(key, v);
  else if (key == "max_iters") s.cfg.max_iters = to_int(key, v);
  else if (key == "cost_plateau_tol") s.cfg.cost_plateau_tol = to_double(key, v);
  else if (key == "method") s.method = parse_method(v);
  else if (key == "dump_every") s.dump_every = to_int(key, v);
  else if (key == "fd_modes") s.cfg.fd_modes = to_int(key, v);
  else if (key == "fd_step") s.cfg.fd_step = to_double(key, v);
  else if (key == "max_halvings") s.cfg.max_halvings = to_int(key, v);
  else if (key == "relax_aspect") s.cfg.relax_aspect = to_double(key, v);
  else if (key == "relax_passes") s.cfg.relax_passes = to_int(key, v);
  else if (key == "smoothing_passes") s.mesh.smoothing_passes = to_int(key, v);
  else throw Error(ErrorCode::BadConfig, "unknown key '" + key + "'");
}

}  // namespace

MethodSelection parse_method(const std::string& s) {
  if (s == "ccbm") return MethodSelection::Ccbm;
  if (s == "kv") return MethodSelection::Kv;
  if (s == "both") return MethodSelection::Both;
  throw Error(ErrorCode::BadConfig, "method: expected ccbm, kv or both, got '" + s + "'");
}

Scenario parse_config(std::istream& is, const Scenario& base) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  for (int lineno = 1; std::getline(is, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::BadConfig, "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  Scenario s = base;
  for (const auto& [k, v] : entries)
    if (k == "scenario") s = preset(v);
  for (const auto& [k, v] : entries)
    if (k != "scenario") apply(s, k, v);
  s.cfg.validate();
  return s;
}

Scenario load_config(const std::filesystem::path& path, const Scenario& base) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  return parse_config(is, base);
}

}  // namespace ccbm

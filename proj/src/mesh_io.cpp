#include "ccbm/mesh_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>

#include "ccbm/errors.hpp"

namespace ccbm {

std::string format_double(double v, int significant_digits) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, significant_digits);
  return std::string(buf, res.ptr);
}

void write_mesh(std::ostream& os, const Mesh& m) {
  os << "vertices " << m.vertices.size() << " triangles " << m.triangles.size() << " boundary "
     << m.boundary_edges.size() << '\n';
  for (const auto& x : m.vertices) os << format_double(x.x()) << ' ' << format_double(x.y()) << '\n';
  for (const auto& t : m.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : m.boundary_edges) os << e.a << ' ' << e.b << ' ' << static_cast<char>(e.tag) << '\n';
}

namespace {

// Rebuilds a closed loop from its edges, following edge direction.
std::vector<int> chain_loop(const std::vector<BoundaryEdge>& edges, BoundaryTag tag) {
  std::vector<std::pair<int, int>> list;
  for (const auto& e : edges)
    if (e.tag == tag) list.emplace_back(e.a, e.b);
  std::vector<int> loop;
  if (list.empty()) return loop;
  std::unordered_map<int, int> next;
  for (auto [a, b] : list) next[a] = b;
  int v = list.front().first;
  for (std::size_t k = 0; k < list.size(); ++k) {
    loop.push_back(v);
    auto it = next.find(v);
    if (it == next.end()) throw Error(ErrorCode::BadConfig, "boundary loop is not closed");
    v = it->second;
  }
  if (v != loop.front()) throw Error(ErrorCode::BadConfig, "boundary edges do not form a single loop");
  return loop;
}

}  // namespace

Mesh read_mesh(std::istream& is) {
  std::string w1, w2, w3;
  std::size_t nv = 0, nt = 0, nb = 0;
  if (!(is >> w1 >> nv >> w2 >> nt >> w3 >> nb) || w1 != "vertices" || w2 != "triangles" ||
      w3 != "boundary") {
    throw Error(ErrorCode::Io, "bad mesh header");
  }
  Mesh m;
  m.vertices.resize(nv);
  m.triangles.resize(nt);
  m.boundary_edges.resize(nb);
  for (auto& x : m.vertices) is >> x.x() >> x.y();
  for (auto& t : m.triangles) is >> t[0] >> t[1] >> t[2];
  for (auto& e : m.boundary_edges) {
    char tag = 0;
    is >> e.a >> e.b >> tag;
    if (tag != 'G' && tag != 'S') throw Error(ErrorCode::Io, "bad boundary tag");
    e.tag = static_cast<BoundaryTag>(tag);
  }
  if (!is) throw Error(ErrorCode::Io, "truncated mesh file");
  m.sigma_loop = chain_loop(m.boundary_edges, BoundaryTag::Sigma);
  m.gamma_loop = chain_loop(m.boundary_edges, BoundaryTag::Gamma);
  validate_mesh(m);
  return m;
}

void write_mesh(const std::filesystem::path& path, const Mesh& m) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string());
  write_mesh(os, m);
}

Mesh read_mesh(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_mesh(is);
}

void write_polyline(std::ostream& os, const Polyline& p) {
  for (const auto& x : p) os << format_double(x.x()) << ' ' << format_double(x.y()) << '\n';
}

Polyline read_polyline(std::istream& is) {
  Polyline p;
  double x = 0.0, y = 0.0;
  while (is >> x >> y) p.emplace_back(x, y);
  return p;
}

void write_polyline(const std::filesystem::path& path, const Polyline& p) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string());
  write_polyline(os, p);
}

}  // namespace ccbm

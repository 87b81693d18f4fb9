// Line-oriented ASCII mesh files:
//
//   vem3d-mesh 1
//   vertices <n>          followed by n lines "x y z"
//   faces <m>             followed by m lines "k v1 ... vk" (0-based ids)
//   cells <c>             followed by c lines "k s1 ... sk", s = +(fid+1) when
//                         the stored face normal points out of the cell and
//                         -(fid+1) otherwise
//
// Coordinates are written with 17 significant digits so that save/load
// round trips are bit-exact.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vem3d/mesh.hpp"

namespace vem3d {

inline void write_mesh(const PolyMesh& mesh, std::ostream& out) {
  char buf[96];
  out << "vem3d-mesh 1\n";
  out << "vertices " << mesh.num_vertices() << "\n";
  for (const auto& v : mesh.vertices()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
    out << buf;
  }
  out << "faces " << mesh.num_faces() << "\n";
  for (const auto& f : mesh.faces()) {
    out << f.vertices.size();
    for (int v : f.vertices) out << ' ' << v;
    out << '\n';
  }
  out << "cells " << mesh.num_cells() << "\n";
  for (const auto& c : mesh.cells()) {
    out << c.faces.size();
    for (std::size_t k = 0; k < c.faces.size(); ++k) out << ' ' << c.orientation[k] * (c.faces[k] + 1);
    out << '\n';
  }
}

inline void save_mesh(const PolyMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_mesh: cannot open " + path + " for writing");
  write_mesh(mesh, out);
  if (!out) throw Error("save_mesh: write failed for " + path);
}

namespace detail {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(std::string("unexpected end of file, expected ") + what, line_ + 1);
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return std::istringstream(line);
  }
  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

inline long read_header_count(LineReader& r, const char* keyword) {
  auto ss = r.next(keyword);
  std::string kw;
  long n = -1;
  if (!(ss >> kw >> n) || kw != keyword || n < 0)
    throw ParseError(std::string("expected '") + keyword + " <count>'", r.line());
  std::string rest;
  if (ss >> rest) throw ParseError("trailing characters after count", r.line());
  return n;
}

inline void expect_end(std::istringstream& ss, int line) {
  std::string rest;
  if (ss >> rest) throw ParseError("trailing token '" + rest + "'", line);
}

}  // namespace detail

inline PolyMesh read_mesh(std::istream& in) {
  detail::LineReader r(in);
  {
    auto ss = r.next("header");
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != "vem3d-mesh") throw ParseError("missing 'vem3d-mesh' header", r.line());
    if (version != 1) throw ParseError("unsupported mesh format version " + std::to_string(version), r.line());
  }
  const long nv = detail::read_header_count(r, "vertices");
  std::vector<Vec3> vertices(nv);
  for (long i = 0; i < nv; ++i) {
    auto ss = r.next("vertex");
    std::string tok[3];
    if (!(ss >> tok[0] >> tok[1] >> tok[2])) throw ParseError("expected three coordinates", r.line());
    for (int d = 0; d < 3; ++d) {
      char* end = nullptr;
      vertices[i][d] = std::strtod(tok[d].c_str(), &end);
      if (end == tok[d].c_str() || *end != '\0') throw ParseError("invalid number '" + tok[d] + "'", r.line());
    }
    detail::expect_end(ss, r.line());
  }
  const long nf = detail::read_header_count(r, "faces");
  std::vector<std::vector<int>> faces(nf);
  for (long f = 0; f < nf; ++f) {
    auto ss = r.next("face");
    int k = 0;
    if (!(ss >> k) || k < 3) throw ParseError("face needs a vertex count >= 3", r.line());
    faces[f].resize(k);
    for (int& v : faces[f]) {
      if (!(ss >> v)) throw ParseError("face has fewer vertex ids than declared", r.line());
      if (v < 0 || v >= nv) throw ParseError("vertex id " + std::to_string(v) + " out of range", r.line());
    }
    detail::expect_end(ss, r.line());
  }
  const long nc = detail::read_header_count(r, "cells");
  std::vector<MeshCell> cells(nc);
  for (long c = 0; c < nc; ++c) {
    auto ss = r.next("cell");
    int k = 0;
    if (!(ss >> k) || k < 4) throw ParseError("cell needs a face count >= 4", r.line());
    for (int i = 0; i < k; ++i) {
      long s = 0;
      if (!(ss >> s)) throw ParseError("cell has fewer face ids than declared", r.line());
      if (s == 0 || std::labs(s) > nf) throw ParseError("face reference " + std::to_string(s) + " out of range", r.line());
      cells[c].faces.push_back(static_cast<int>(std::labs(s) - 1));
      cells[c].orientation.push_back(s > 0 ? 1 : -1);
    }
    detail::expect_end(ss, r.line());
  }
  std::string extra;
  while (std::getline(in, extra)) {
    if (extra.find_first_not_of(" \t\r") != std::string::npos)
      throw ParseError("unexpected content after cells block", r.line() + 1);
  }
  return PolyMesh::from_signed(std::move(vertices), std::move(faces), std::move(cells));
}

inline PolyMesh load_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_mesh: cannot open " + path);
  return read_mesh(in);
}

}  // namespace vem3d

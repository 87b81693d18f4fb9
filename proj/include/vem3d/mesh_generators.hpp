// Generators for the structured cube meshes and the collapsing-octahedron
// sequence on the unit cube.
#pragma once

#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "vem3d/mesh.hpp"

namespace vem3d {

/// N x N x N hexahedra tiling [0,1]^3.
inline PolyMesh build_cube_mesh(int n) {
  if (n < 1) throw InvalidArgument("build_cube_mesh: N must be >= 1");
  const int np = n + 1;
  auto vid = [np](int i, int j, int k) { return i + np * (j + np * k); };
  std::vector<Vec3> vertices;
  vertices.reserve(np * np * np);
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n, static_cast<double>(k) / n);

  std::vector<std::vector<int>> faces;
  // Faces normal to x at plane i, indexed (i, j, k) with j, k < n.
  std::map<std::tuple<int, int, int, int>, int> face_id;
  auto add = [&](int axis, int i, int j, int k, std::vector<int> cyc) {
    face_id[{axis, i, j, k}] = static_cast<int>(faces.size());
    faces.push_back(std::move(cyc));
  };
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        add(0, i, j, k, {vid(i, j, k), vid(i, j + 1, k), vid(i, j + 1, k + 1), vid(i, j, k + 1)});
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        add(1, i, j, k, {vid(i, j, k), vid(i, j, k + 1), vid(i + 1, j, k + 1), vid(i + 1, j, k)});
  for (int k = 0; k <= n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        add(2, i, j, k, {vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k), vid(i, j + 1, k)});

  std::vector<MeshCell> cells;
  cells.reserve(n * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        MeshCell c;
        // Stored normals point along +axis.
        c.faces = {face_id[{0, i, j, k}], face_id[{0, i + 1, j, k}], face_id[{1, i, j, k}],
                   face_id[{1, i, j + 1, k}], face_id[{2, i, j, k}], face_id[{2, i, j, k + 1}]};
        c.orientation = {-1, 1, -1, 1, -1, 1};
        cells.push_back(std::move(c));
      }
  return PolyMesh::from_signed(std::move(vertices), std::move(faces), std::move(cells));
}

/// Apex offset of the collapsing octahedron from the cube centre.
inline double collapse_apex_offset(int level) { return 0.25 * std::ldexp(1.0, -level); }

/// Unit cube split into an internal octahedron and four notched boundary
/// polyhedra.
///
/// The octahedron has apexes A = (0.5 - d, 0.5, 0.5), B = (0.5 + d, 0.5, 0.5)
/// with d = 0.25 * 2^-level, and equatorial vertices at the centres of the
/// four cube faces y = 0, y = 1, z = 0, z = 1. The planes y = 0.5 and
/// z = 0.5 cut the rest of the cube into four quarter boxes, one around each
/// cube edge parallel to x; each quarter box loses the tetrahedral notch
/// (A, B, E1, E2) occupied by the octahedron. Cell 0 is the octahedron.
inline PolyMesh build_collapsing_mesh(int level) {
  if (level < 0 || level > 52) throw InvalidArgument("build_collapsing_mesh: level must be in [0, 52]");
  const double d = collapse_apex_offset(level);
  std::vector<Vec3> vertices;
  std::map<std::tuple<double, double, double>, int> index;
  auto v = [&](double x, double y, double z) {
    auto key = std::make_tuple(x, y, z);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(vertices.size());
    vertices.emplace_back(x, y, z);
    index.emplace(key, id);
    return id;
  };
  const int A = v(0.5 - d, 0.5, 0.5);
  const int B = v(0.5 + d, 0.5, 0.5);
  const int L = v(0.0, 0.5, 0.5);
  const int R = v(1.0, 0.5, 0.5);

  std::vector<std::vector<int>> faces;
  std::map<std::vector<int>, int> face_index;
  auto face = [&](std::vector<int> cyc) {
    std::vector<int> key = cyc;
    std::sort(key.begin(), key.end());
    auto it = face_index.find(key);
    if (it != face_index.end()) return it->second;
    const int id = static_cast<int>(faces.size());
    faces.push_back(std::move(cyc));
    face_index.emplace(std::move(key), id);
    return id;
  };

  // Quarter boxes in (y, z): corner cube edge at (ey, ez), the quarter spans
  // y between ey and 0.5 and z between ez and 0.5.
  const std::array<std::array<double, 2>, 4> corners = {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  auto equator = [&](int axis, double value) {
    // Centre of cube face y = value (axis 0) or z = value (axis 1).
    return axis == 0 ? v(0.5, value, 0.5) : v(0.5, 0.5, value);
  };

  std::vector<int> octahedron;
  std::vector<std::vector<int>> boxes;
  for (const auto& c : corners) {
    const double ey = c[0], ez = c[1];
    const int Ey = equator(0, ey);  // on face y = ey
    const int Ez = equator(1, ez);  // on face z = ez
    std::vector<int> cell;
    // Cube end faces x = 0 and x = 1: quarter squares.
    for (double x : {0.0, 1.0}) {
      const int mid = (x == 0.0) ? L : R;
      cell.push_back(face({v(x, ey, ez), v(x, 0.5, ez), mid, v(x, ey, 0.5)}));
    }
    // Boundary face y = ey: rectangle z in [ez, 0.5] with Ey on its inner edge.
    cell.push_back(face({v(0, ey, ez), v(1, ey, ez), v(1, ey, 0.5), Ey, v(0, ey, 0.5)}));
    // Boundary face z = ez.
    cell.push_back(face({v(0, ey, ez), v(1, ey, ez), v(1, 0.5, ez), Ez, v(0, 0.5, ez)}));
    // Internal plane y = 0.5 (contains Ez, A, B): two quads around the notch.
    cell.push_back(face({v(0, 0.5, ez), Ez, A, L}));
    cell.push_back(face({Ez, v(1, 0.5, ez), R, B}));
    // Internal plane z = 0.5 (contains Ey, A, B).
    cell.push_back(face({v(0, ey, 0.5), Ey, A, L}));
    cell.push_back(face({Ey, v(1, ey, 0.5), R, B}));
    // Notch faces shared with the octahedron.
    const int na = face({A, Ey, Ez});
    const int nb = face({B, Ey, Ez});
    cell.push_back(na);
    cell.push_back(nb);
    octahedron.push_back(na);
    octahedron.push_back(nb);
    boxes.push_back(std::move(cell));
  }
  std::vector<std::vector<int>> cells;
  cells.push_back(std::move(octahedron));
  for (auto& b : boxes) cells.push_back(std::move(b));
  return PolyMesh::from_unoriented(std::move(vertices), std::move(faces), cells);
}

}  // namespace vem3d

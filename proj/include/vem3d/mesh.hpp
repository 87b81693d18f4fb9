// Polyhedral mesh: vertices, derived edges, polygonal faces with a stored
// orientation, and cells as signed face lists. A mesh is validated once at
// construction and is immutable afterwards.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vem3d/errors.hpp"
#include "vem3d/polybasis.hpp"
#include "vem3d/quadrature.hpp"

namespace vem3d {

/// Orthonormal in-plane frame of a face. `normal` follows the stored vertex
/// cycle unless the frame was requested for a specific owner cell.
struct FaceFrame {
  Vec3 origin;  // barycenter x_F
  std::array<Vec3, 2> axes;
  Vec3 normal;
  double diameter = 0.0;

  Vec2 to_local(const Vec3& x) const {
    const Vec3 d = x - origin;
    return {d.dot(axes[0]), d.dot(axes[1])};
  }
  Vec3 to_global(const Vec2& xi) const { return origin + xi[0] * axes[0] + xi[1] * axes[1]; }
};

struct FaceGeometry {
  FaceFrame frame;
  double area = 0.0;
  std::vector<Vec2> local_vertices;  // cycle in frame coordinates
};

struct CellGeometry {
  Vec3 barycenter;
  double diameter = 0.0;
  double volume = 0.0;
  std::vector<int> vertices;  // global ids, ascending
};

struct MeshFace {
  std::vector<int> vertices;  // cycle, counter-clockwise about the stored normal
  std::vector<int> edges;     // edges[k] joins vertices[k] and vertices[k+1]
};

struct MeshCell {
  std::vector<int> faces;
  std::vector<int> orientation;  // +1: stored normal points out of the cell
};

inline constexpr double kPlanarityTolerance = 1e-10;

class PolyMesh {
 public:
  /// Builds from signed face references; orientation[k] = +1 means the stored
  /// face normal is outward for the cell.
  static PolyMesh from_signed(std::vector<Vec3> vertices, std::vector<std::vector<int>> face_cycles,
                              std::vector<MeshCell> cells) {
    PolyMesh m;
    m.vertices_ = std::move(vertices);
    m.faces_.resize(face_cycles.size());
    for (std::size_t f = 0; f < face_cycles.size(); ++f) m.faces_[f].vertices = std::move(face_cycles[f]);
    m.cells_ = std::move(cells);
    m.finalize();
    return m;
  }

  /// Builds from plain face lists per cell; orientations are inferred by
  /// propagating a consistent orientation across shared edges of each cell
  /// and choosing the sign that gives a positive volume.
  static PolyMesh from_unoriented(std::vector<Vec3> vertices, std::vector<std::vector<int>> face_cycles,
                                  const std::vector<std::vector<int>>& cell_faces) {
    std::vector<MeshCell> cells(cell_faces.size());
    for (std::size_t c = 0; c < cell_faces.size(); ++c) {
      cells[c].faces = cell_faces[c];
      cells[c].orientation = orient_cell(vertices, face_cycles, cell_faces[c], static_cast<int>(c));
    }
    return from_signed(std::move(vertices), std::move(face_cycles), std::move(cells));
  }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const Vec3& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 2>& edge(int e) const { return edges_[e]; }
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const MeshFace& face(int f) const { return faces_[f]; }
  const std::vector<MeshFace>& faces() const { return faces_; }
  const MeshCell& cell(int c) const { return cells_[c]; }
  const std::vector<MeshCell>& cells() const { return cells_; }

  const FaceGeometry& face_geometry(int f) const { return face_geometry_[f]; }
  const CellGeometry& cell_geometry(int c) const { return cell_geometry_[c]; }

  /// Cells adjacent to a face: second entry is -1 on the boundary.
  const std::array<int, 2>& face_cells(int f) const { return face_cells_[f]; }
  bool is_boundary_face(int f) const { return face_cells_[f][1] < 0; }
  bool is_boundary_vertex(int v) const { return boundary_vertex_[v]; }
  bool is_boundary_edge(int e) const { return boundary_edge_[e]; }

  /// Edges of a cell, ascending global ids.
  const std::vector<int>& cell_edges(int c) const { return cell_edges_[c]; }

  /// Outward vertex cycle of face k of cell c.
  std::vector<Vec3> oriented_face_points(int c, int k) const {
    const auto& cyc = faces_[cells_[c].faces[k]].vertices;
    std::vector<Vec3> pts;
    pts.reserve(cyc.size());
    for (int v : cyc) pts.push_back(vertices_[v]);
    if (cells_[c].orientation[k] < 0) std::reverse(pts.begin(), pts.end());
    return pts;
  }

  std::vector<std::vector<Vec3>> oriented_faces(int c) const {
    std::vector<std::vector<Vec3>> out;
    for (std::size_t k = 0; k < cells_[c].faces.size(); ++k) out.push_back(oriented_face_points(c, static_cast<int>(k)));
    return out;
  }

  /// Max cell diameter.
  double mesh_size() const {
    double h = 0.0;
    for (const auto& g : cell_geometry_) h = std::max(h, g.diameter);
    return h;
  }

 private:
  static std::vector<int> orient_cell(const std::vector<Vec3>& vertices,
                                      const std::vector<std::vector<int>>& face_cycles,
                                      const std::vector<int>& faces, int cell_id) {
    const int nf = static_cast<int>(faces.size());
    for (int f : faces)
      if (f < 0 || f >= static_cast<int>(face_cycles.size()))
        throw InvalidMesh("cell " + std::to_string(cell_id) + " references unknown face " + std::to_string(f));
    // edge -> (local face, direction +1 if traversed lo->hi)
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> uses;
    for (int k = 0; k < nf; ++k) {
      const auto& cyc = face_cycles[faces[k]];
      for (std::size_t i = 0; i < cyc.size(); ++i) {
        const int a = cyc[i], b = cyc[(i + 1) % cyc.size()];
        uses[{std::min(a, b), std::max(a, b)}].push_back({k, a < b ? 1 : -1});
      }
    }
    std::vector<int> sign(nf, 0);
    for (int seed = 0; seed < nf; ++seed) {
      if (sign[seed] != 0) continue;
      sign[seed] = 1;
      std::queue<int> todo;
      todo.push(seed);
      while (!todo.empty()) {
        const int k = todo.front();
        todo.pop();
        const auto& cyc = face_cycles[faces[k]];
        for (std::size_t i = 0; i < cyc.size(); ++i) {
          const int a = cyc[i], b = cyc[(i + 1) % cyc.size()];
          const auto& list = uses[{std::min(a, b), std::max(a, b)}];
          const int dir_k = (a < b ? 1 : -1) * sign[k];
          for (const auto& [other, dir] : list) {
            if (other == k) continue;
            const int want = -dir_k * dir;
            if (sign[other] == 0) {
              sign[other] = want;
              todo.push(other);
            }
          }
        }
      }
    }
    double vol = 0.0;
    for (int k = 0; k < nf; ++k) {
      const auto& cyc = face_cycles[faces[k]];
      for (std::size_t i = 1; i + 1 < cyc.size(); ++i)
        vol += sign[k] * vertices[cyc[0]].dot(vertices[cyc[i]].cross(vertices[cyc[i + 1]])) / 6.0;
    }
    if (vol < 0)
      for (int& s : sign) s = -s;
    return sign;
  }

  void finalize() {
    const int nv = num_vertices();
    // Edges in order of first appearance.
    std::map<std::pair<int, int>, int> edge_id;
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      auto& face = faces_[f];
      if (face.vertices.size() < 3)
        throw InvalidMesh("face " + std::to_string(f) + " has fewer than 3 vertices");
      std::set<int> seen;
      for (int v : face.vertices) {
        if (v < 0 || v >= nv)
          throw InvalidMesh("face " + std::to_string(f) + " references unknown vertex " + std::to_string(v));
        if (!seen.insert(v).second)
          throw InvalidMesh("face " + std::to_string(f) + " repeats vertex " + std::to_string(v));
      }
      face.edges.clear();
      for (std::size_t k = 0; k < face.vertices.size(); ++k) {
        const int a = face.vertices[k], b = face.vertices[(k + 1) % face.vertices.size()];
        const auto key = std::make_pair(std::min(a, b), std::max(a, b));
        auto [it, inserted] = edge_id.emplace(key, static_cast<int>(edges_.size()));
        if (inserted) edges_.push_back({key.first, key.second});
        face.edges.push_back(it->second);
      }
    }

    // Face-cell adjacency.
    face_cells_.assign(faces_.size(), {-1, -1});
    std::vector<int> use_count(faces_.size(), 0);
    std::vector<int> first_sign(faces_.size(), 0);
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const auto& cell = cells_[c];
      if (cell.faces.size() != cell.orientation.size())
        throw InvalidMesh("cell " + std::to_string(c) + " has mismatched orientation flags");
      if (cell.faces.size() < 4) throw InvalidMesh("cell " + std::to_string(c) + " has fewer than 4 faces");
      for (std::size_t k = 0; k < cell.faces.size(); ++k) {
        const int f = cell.faces[k];
        if (f < 0 || f >= num_faces())
          throw InvalidMesh("cell " + std::to_string(c) + " references unknown face " + std::to_string(f));
        if (cell.orientation[k] != 1 && cell.orientation[k] != -1)
          throw InvalidMesh("cell " + std::to_string(c) + " has an invalid orientation flag");
        const int n = use_count[f]++;
        if (n >= 2)
          throw InvalidMesh("conformity violation: face " + std::to_string(f) + " is used by more than two cells");
        face_cells_[f][n] = static_cast<int>(c);
        if (n == 0) {
          first_sign[f] = cell.orientation[k];
        } else if (first_sign[f] == cell.orientation[k]) {
          throw InvalidMesh("conformity violation: face " + std::to_string(f) +
                            " has the same orientation in both neighbouring cells");
        }
      }
    }
    for (std::size_t f = 0; f < faces_.size(); ++f)
      if (use_count[f] == 0) throw InvalidMesh("face " + std::to_string(f) + " belongs to no cell");

    boundary_vertex_.assign(nv, false);
    boundary_edge_.assign(edges_.size(), false);
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      if (face_cells_[f][1] >= 0) continue;
      for (int v : faces_[f].vertices) boundary_vertex_[v] = true;
      for (int e : faces_[f].edges) boundary_edge_[e] = true;
    }

    face_geometry_.resize(faces_.size());
    for (std::size_t f = 0; f < faces_.size(); ++f) face_geometry_[f] = compute_face_geometry(static_cast<int>(f));

    cell_geometry_.resize(cells_.size());
    cell_edges_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      check_cell_closed(static_cast<int>(c));
      cell_geometry_[c] = compute_cell_geometry(static_cast<int>(c));
    }
  }

  FaceGeometry compute_face_geometry(int f) const {
    const auto& cyc = faces_[f].vertices;
    const std::size_t n = cyc.size();
    Vec3 newell = Vec3::Zero();
    for (std::size_t k = 0; k < n; ++k) newell += vertices_[cyc[k]].cross(vertices_[cyc[(k + 1) % n]]);
    double diam = 0.0;
    for (int a : cyc)
      for (int b : cyc) diam = std::max(diam, (vertices_[a] - vertices_[b]).norm());
    if (!(newell.norm() > 1e-14 * diam * diam))
      throw DegenerateDomain("face " + std::to_string(f) + " has zero area");
    FaceGeometry g;
    g.frame.normal = newell.normalized();
    const Vec3 first_edge = vertices_[cyc[1]] - vertices_[cyc[0]];
    if (!(first_edge.norm() > 0)) throw DegenerateDomain("face " + std::to_string(f) + " has a zero-length edge");
    g.frame.axes[0] = (first_edge - first_edge.dot(g.frame.normal) * g.frame.normal).normalized();
    g.frame.axes[1] = g.frame.normal.cross(g.frame.axes[0]);
    g.frame.origin = vertices_[cyc[0]];
    g.frame.diameter = diam;

    for (int v : cyc) {
      const double off = (vertices_[v] - g.frame.origin).dot(g.frame.normal);
      if (std::abs(off) > kPlanarityTolerance * diam)
        throw InvalidMesh("face " + std::to_string(f) + " is not planar (offset " + std::to_string(off) + ")");
    }

    std::vector<Vec2> local;
    for (int v : cyc) local.push_back(g.frame.to_local(vertices_[v]));
    check_simple(local, f);
    const auto rule = polygon_rule(local, 1);
    g.area = rule.measure();
    if (!(g.area > 0))
      throw InvalidMesh("face " + std::to_string(f) + " has a self-inconsistent orientation");
    Vec2 centroid = Vec2::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) centroid += rule.weights[q] * rule.points[q];
    centroid /= g.area;
    g.frame.origin = g.frame.to_global(centroid);
    for (auto& p : local) p -= centroid;
    g.local_vertices = std::move(local);
    return g;
  }

  static bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
      return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    };
    const double d1 = orient(c, d, a), d2 = orient(c, d, b), d3 = orient(a, b, c), d4 = orient(a, b, d);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
  }

  static void check_simple(const std::vector<Vec2>& pts, int f) {
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        if (segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]))
          throw InvalidMesh("face " + std::to_string(f) + " is not a simple polygon");
      }
  }

  void check_cell_closed(int c) {
    const auto& cell = cells_[c];
    std::map<int, int> edge_balance;
    std::set<int> edges;
    for (std::size_t k = 0; k < cell.faces.size(); ++k) {
      const auto& face = faces_[cell.faces[k]];
      const std::size_t n = face.vertices.size();
      for (std::size_t i = 0; i < n; ++i) {
        const int a = face.vertices[i], b = face.vertices[(i + 1) % n];
        edge_balance[face.edges[i]] += (a < b ? 1 : -1) * cell.orientation[k];
        edges.insert(face.edges[i]);
      }
    }
    for (const auto& [e, bal] : edge_balance)
      if (bal != 0)
        throw InvalidMesh("cell " + std::to_string(c) + " is not closed or inconsistently oriented at edge " +
                          std::to_string(e));
    cell_edges_[c].assign(edges.begin(), edges.end());
  }

  CellGeometry compute_cell_geometry(int c) const {
    CellGeometry g;
    std::set<int> verts;
    for (int f : cells_[c].faces)
      for (int v : faces_[f].vertices) verts.insert(v);
    g.vertices.assign(verts.begin(), verts.end());
    for (int a : g.vertices)
      for (int b : g.vertices) g.diameter = std::max(g.diameter, (vertices_[a] - vertices_[b]).norm());
    const auto rule = polyhedron_rule(oriented_faces(c), 1);
    g.volume = rule.measure();
    if (g.volume < 0)
      throw InvalidMesh("cell " + std::to_string(c) + " has inward-oriented faces (negative volume)");
    g.barycenter = Vec3::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) g.barycenter += rule.weights[q] * rule.points[q];
    g.barycenter /= g.volume;
    return g;
  }

  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<MeshFace> faces_;
  std::vector<MeshCell> cells_;
  std::vector<std::array<int, 2>> face_cells_;
  std::vector<bool> boundary_vertex_;
  std::vector<bool> boundary_edge_;
  std::vector<FaceGeometry> face_geometry_;
  std::vector<CellGeometry> cell_geometry_;
  std::vector<std::vector<int>> cell_edges_;
};

inline const CellGeometry& cell_geometry(const PolyMesh& mesh, int c) {
  if (c < 0 || c >= mesh.num_cells()) throw InvalidArgument("cell_geometry: invalid cell id");
  return mesh.cell_geometry(c);
}

/// Frame of face f with the normal pointing out of `owner`.
inline FaceFrame face_frame(const PolyMesh& mesh, int f, int owner) {
  if (f < 0 || f >= mesh.num_faces()) throw InvalidArgument("face_frame: invalid face id");
  const auto& cells = mesh.face_cells(f);
  if (owner != cells[0] && owner != cells[1])
    throw InvalidArgument("face_frame: cell " + std::to_string(owner) + " does not own face " + std::to_string(f));
  FaceFrame frame = mesh.face_geometry(f).frame;
  const auto& cell = mesh.cell(owner);
  for (std::size_t k = 0; k < cell.faces.size(); ++k)
    if (cell.faces[k] == f && cell.orientation[k] < 0) frame.normal = -frame.normal;
  return frame;
}

}  // namespace vem3d

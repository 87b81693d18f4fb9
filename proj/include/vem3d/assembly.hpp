// Global dof numbering, Dirichlet treatment, sparse assembly and solve.
//
// Global numbering: vertices, then p-1 nodes per edge (from the lower to the
// higher vertex id), then face moments, then bulk moments. Face moments are
// taken in the face frame of FaceOperators, which is a property of the face
// and therefore shared by both neighbouring cells.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <string>
#include <vector>

#include "vem3d/elemvem.hpp"
#include "vem3d/errors.hpp"
#include "vem3d/facevem.hpp"
#include "vem3d/mesh.hpp"
#include "vem3d/parallel.hpp"

namespace vem3d {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

enum class DofKind { vertex, edge_node, face_moment, bulk_moment };

struct DofMap {
  int p = 1;
  int num_vertices = 0, num_edges = 0, num_faces = 0, num_cells = 0;
  int count = 0;
  std::vector<char> dirichlet;
  VectorXd prescribed;          // boundary values (zero on free dofs)
  std::vector<int> free_index;  // global -> free position, -1 if prescribed
  std::vector<int> free_dofs;

  int per_edge() const { return p - 1; }
  int per_face() const { return dim_poly(p - 2, 2); }
  int per_cell() const { return dim_poly(p - 2, 3); }
  int edge_base() const { return num_vertices; }
  int face_base() const { return edge_base() + num_edges * per_edge(); }
  int bulk_base() const { return face_base() + num_faces * per_face(); }

  int vertex_dof(int v) const { return v; }
  int edge_dof(int e, int j) const { return edge_base() + e * per_edge() + j; }
  int face_dof(int f, int g) const { return face_base() + f * per_face() + g; }
  int bulk_dof(int c, int g) const { return bulk_base() + c * per_cell() + g; }
  int num_free() const { return static_cast<int>(free_dofs.size()); }

  DofKind kind(int gid) const {
    if (gid < edge_base()) return DofKind::vertex;
    if (gid < face_base()) return DofKind::edge_node;
    if (gid < bulk_base()) return DofKind::face_moment;
    return DofKind::bulk_moment;
  }
};

namespace detail {

inline VectorXd face_moments(const PolyMesh& mesh, const FaceOperators& fo, const ScalarField& u) {
  const int n = dim_poly(fo.p - 2, 2);
  VectorXd out = VectorXd::Zero(n);
  if (n == 0) return out;
  const auto& geom = mesh.face_geometry(fo.face);
  const VolumeRule<2> rule = polygon_rule(geom.local_vertices, 2 * fo.p + 2);
  for (std::size_t q = 0; q < rule.size(); ++q)
    out += rule.weights[q] * u(geom.frame.to_global(rule.points[q])) * fo.basis_values(rule.points[q]).head(n);
  return out / fo.area;
}

inline void mark_boundary(const PolyMesh& mesh, DofMap& map) {
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.is_boundary_vertex(v)) map.dirichlet[map.vertex_dof(v)] = 1;
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (mesh.is_boundary_edge(e))
      for (int j = 0; j < map.per_edge(); ++j) map.dirichlet[map.edge_dof(e, j)] = 1;
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (mesh.is_boundary_face(f))
      for (int g = 0; g < map.per_face(); ++g) map.dirichlet[map.face_dof(f, g)] = 1;
}

}  // namespace detail

/// Assigns prescribed values on all Dirichlet dofs by interpolating g.
inline void set_dirichlet_values(const PolyMesh& mesh, const std::vector<FaceOperators>& faces, DofMap& map,
                                 const ScalarField& g) {
  map.prescribed = VectorXd::Zero(map.count);
  if (!g) return;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.is_boundary_vertex(v)) map.prescribed[map.vertex_dof(v)] = g(mesh.vertex(v));
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.is_boundary_edge(e)) continue;
    const auto& ev = mesh.edge(e);
    for (int j = 0; j < map.per_edge(); ++j)
      map.prescribed[map.edge_dof(e, j)] = g(edge_node(mesh.vertex(ev[0]), mesh.vertex(ev[1]), map.p, j));
  }
  if (map.per_face() == 0) return;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!mesh.is_boundary_face(f)) continue;
    const VectorXd m = detail::face_moments(mesh, faces.at(f), g);
    for (int gi = 0; gi < map.per_face(); ++gi) map.prescribed[map.face_dof(f, gi)] = m[gi];
  }
}

inline DofMap build_dof_map(const PolyMesh& mesh, int p) {
  if (p < 1) throw InvalidArgument("build_dof_map: p must be >= 1");
  DofMap map;
  map.p = p;
  map.num_vertices = mesh.num_vertices();
  map.num_edges = mesh.num_edges();
  map.num_faces = mesh.num_faces();
  map.num_cells = mesh.num_cells();
  map.count = map.bulk_base() + map.num_cells * map.per_cell();
  map.dirichlet.assign(map.count, 0);
  map.prescribed = VectorXd::Zero(map.count);
  detail::mark_boundary(mesh, map);
  map.free_index.assign(map.count, -1);
  for (int i = 0; i < map.count; ++i) {
    if (map.dirichlet[i]) continue;
    map.free_index[i] = static_cast<int>(map.free_dofs.size());
    map.free_dofs.push_back(i);
  }
  return map;
}

/// Dof map with boundary values of g; face moments use the face basis `basis`.
inline DofMap build_dof_map(const PolyMesh& mesh, int p, MomentBasis basis, const ScalarField& g) {
  DofMap map = build_dof_map(mesh, p);
  std::vector<FaceOperators> faces(mesh.num_faces());
  if (g && map.per_face() > 0)
    for (int f = 0; f < mesh.num_faces(); ++f)
      if (mesh.is_boundary_face(f)) faces[f] = face_operators(mesh, f, p, basis);
  set_dirichlet_values(mesh, faces, map, g);
  return map;
}

/// Element-local to global dof ids.
inline std::vector<int> element_global_dofs(const DofMap& map, const ElementDofLayout& L, int cell) {
  std::vector<int> ids;
  ids.reserve(L.total);
  for (int v : L.vertices) ids.push_back(map.vertex_dof(v));
  for (int e : L.edges)
    for (int j = 0; j < map.per_edge(); ++j) ids.push_back(map.edge_dof(e, j));
  for (int f : L.faces)
    for (int g = 0; g < map.per_face(); ++g) ids.push_back(map.face_dof(f, g));
  for (int g = 0; g < map.per_cell(); ++g) ids.push_back(map.bulk_dof(cell, g));
  return ids;
}

/// Face and element operators of a whole mesh for one (p, choice).
struct Discretization {
  const PolyMesh* mesh = nullptr;
  int p = 1;
  BasisChoice choice = BasisChoice::standard;
  std::vector<FaceOperators> faces;
  std::vector<ElementOperators> elements;
  DofMap dofs;

  std::vector<int> global_dofs(int c) const { return element_global_dofs(dofs, elements[c].layout, c); }
};

inline Discretization discretize(const PolyMesh& mesh, int p, BasisChoice choice, int threads = 0) {
  Discretization d;
  d.mesh = &mesh;
  d.p = p;
  d.choice = choice;
  d.dofs = build_dof_map(mesh, p);
  d.faces.resize(mesh.num_faces());
  parallel_for(mesh.num_faces(), [&](int f) { d.faces[f] = face_operators(mesh, f, p, face_basis(choice)); }, threads);
  d.elements.resize(mesh.num_cells());
  parallel_for(mesh.num_cells(), [&](int c) { d.elements[c] = element_operators(mesh, c, p, choice, d.faces); },
               threads);
  return d;
}

/// Dof vector (all global dofs) of a given function.
inline VectorXd interpolate_dofs(const Discretization& d, const ScalarField& u) {
  const PolyMesh& mesh = *d.mesh;
  const DofMap& map = d.dofs;
  VectorXd x = VectorXd::Zero(map.count);
  for (int v = 0; v < mesh.num_vertices(); ++v) x[map.vertex_dof(v)] = u(mesh.vertex(v));
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& ev = mesh.edge(e);
    for (int j = 0; j < map.per_edge(); ++j)
      x[map.edge_dof(e, j)] = u(edge_node(mesh.vertex(ev[0]), mesh.vertex(ev[1]), d.p, j));
  }
  if (map.per_face() > 0)
    for (int f = 0; f < mesh.num_faces(); ++f) {
      const VectorXd m = detail::face_moments(mesh, d.faces[f], u);
      for (int g = 0; g < map.per_face(); ++g) x[map.face_dof(f, g)] = m[g];
    }
  if (map.per_cell() > 0)
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto& ops = d.elements[c];
      const VolumeRule<3> rule = polyhedron_rule(mesh.oriented_faces(c), 2 * d.p + 2);
      VectorXd m = VectorXd::Zero(map.per_cell());
      for (std::size_t q = 0; q < rule.size(); ++q)
        m += rule.weights[q] * u(rule.points[q]) * ops.basis_values(rule.points[q]).head(map.per_cell());
      m /= ops.volume;
      for (int g = 0; g < map.per_cell(); ++g) x[map.bulk_dof(c, g)] = m[g];
    }
  return x;
}

/// Linear system on the free dofs. A is stored in full (both triangles)
/// compressed-column form and is exactly symmetric.
struct SparseSystem {
  SparseMatrix A;
  VectorXd b;
  VectorXd lifting;     // -A_fp g, already included in b
  VectorXd prescribed;  // all global dofs, boundary values set
  std::vector<int> free_dofs;
  int num_dofs = 0;
};

inline SparseSystem assemble(const Discretization& d, Stabilization stab, const ScalarField& f, const ScalarField& g,
                             int threads = 0) {
  const PolyMesh& mesh = *d.mesh;
  DofMap map = d.dofs;
  set_dirichlet_values(mesh, d.faces, map, g);

  const int nc = mesh.num_cells();
  std::vector<MatrixXd> K(nc);
  std::vector<VectorXd> F(nc);
  parallel_for(
      nc,
      [&](int c) {
        const MatrixXd k = local_stiffness(d.elements[c], stab);
        K[c] = 0.5 * (k + k.transpose());
        F[c] = f ? local_load(mesh, d.elements[c], f) : VectorXd::Zero(d.elements[c].num_dofs());
      },
      threads);

  SparseSystem sys;
  sys.num_dofs = map.count;
  sys.free_dofs = map.free_dofs;
  sys.prescribed = map.prescribed;
  const int nfree = map.num_free();
  sys.b = VectorXd::Zero(nfree);
  sys.lifting = VectorXd::Zero(nfree);
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < nc; ++c) {
    const std::vector<int> ids = d.global_dofs(c);
    const int n = static_cast<int>(ids.size());
    for (int i = 0; i < n; ++i) {
      const int fi = map.free_index[ids[i]];
      if (fi < 0) continue;
      sys.b[fi] += F[c][i];
      for (int j = 0; j < n; ++j) {
        const int fj = map.free_index[ids[j]];
        if (fj >= 0) {
          trips.emplace_back(fi, fj, K[c](i, j));
        } else {
          sys.lifting[fi] -= K[c](i, j) * map.prescribed[ids[j]];
        }
      }
    }
  }
  sys.b += sys.lifting;
  sys.A.resize(nfree, nfree);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.A.makeCompressed();
  return sys;
}

inline SparseSystem assemble(const PolyMesh& mesh, int p, BasisChoice choice, Stabilization stab,
                             const ScalarField& f, const ScalarField& g, int threads = 0) {
  return assemble(discretize(mesh, p, choice, threads), stab, f, g, threads);
}

enum class SolveMethod { automatic, direct, cg };

struct SolveResult {
  VectorXd x;                  // free dofs
  double relative_residual = 0.0;
  int iterations = 0;          // CG iterations or refinement steps
  SolveMethod method = SolveMethod::direct;
};

namespace detail {

inline double relative_residual(const SparseMatrix& A, const VectorXd& x, const VectorXd& b) {
  double anorm = 0.0;
  for (int k = 0; k < A.outerSize(); ++k) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) s += std::abs(it.value());
    anorm = std::max(anorm, s);
  }
  const double denom = anorm * x.norm() + b.norm();
  const double r = (A * x - b).norm();
  return denom > 0.0 ? r / denom : r;
}

inline SolveResult conjugate_gradient(const SparseMatrix& A, const VectorXd& b) {
  const int n = static_cast<int>(b.size());
  SolveResult res;
  res.method = SolveMethod::cg;
  res.x = VectorXd::Zero(n);
  if (n == 0) return res;
  VectorXd inv_diag(n);
  for (int i = 0; i < n; ++i) {
    const double a = A.coeff(i, i);
    inv_diag[i] = a > 0.0 ? 1.0 / a : 1.0;
  }
  VectorXd r = b;
  VectorXd z = inv_diag.cwiseProduct(r);
  VectorXd p = z;
  double rz = r.dot(z);
  const double bnorm = b.norm();
  std::vector<double> history{r.norm()};
  if (bnorm == 0.0) return res;
  const int max_iter = 10 * n;
  for (int it = 1; it <= max_iter; ++it) {
    const VectorXd Ap = A * p;
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0))
      throw IterativeFailure("conjugate gradient breakdown: p^T A p = " + std::to_string(pAp), history);
    const double alpha = rz / pAp;
    res.x += alpha * p;
    r -= alpha * Ap;
    history.push_back(r.norm());
    res.iterations = it;
    if (relative_residual(A, res.x, b) <= 1e-13) {
      res.relative_residual = relative_residual(A, res.x, b);
      return res;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw IterativeFailure("conjugate gradient did not converge in " + std::to_string(max_iter) + " iterations",
                         history);
}

}  // namespace detail

/// Solves A x = b on the free dofs. The direct path is a sparse LDL^T
/// factorization with iterative refinement; `automatic` falls back to
/// diagonally preconditioned CG when the factorization breaks down.
inline SolveResult solve(const SparseSystem& sys, SolveMethod method = SolveMethod::automatic) {
  const SparseMatrix& A = sys.A;
  const VectorXd& b = sys.b;
  if (method == SolveMethod::cg) return detail::conjugate_gradient(A, b);
  SolveResult res;
  res.method = SolveMethod::direct;
  if (b.size() == 0) {
    res.x = VectorXd::Zero(0);
    return res;
  }
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
  double pivot = 0.0;
  bool ok = ldlt.info() == Eigen::Success;
  if (ok) {
    const VectorXd dvec = ldlt.vectorD();
    const double dmax = dvec.cwiseAbs().maxCoeff();
    pivot = dvec.cwiseAbs().minCoeff();
    ok = std::isfinite(dmax) && pivot > 1e-14 * dmax;
  }
  if (!ok) {
    if (method == SolveMethod::direct)
      throw SolverError("sparse LDL^T factorization broke down (pivot " + std::to_string(pivot) + ")", pivot);
    return detail::conjugate_gradient(A, b);
  }
  res.x = ldlt.solve(b);
  res.relative_residual = detail::relative_residual(A, res.x, b);
  for (int step = 0; step < 3 && res.relative_residual > 1e-14; ++step) {
    const VectorXd candidate = res.x + ldlt.solve(b - A * res.x);
    const double r = detail::relative_residual(A, candidate, b);
    if (!(r < res.relative_residual)) break;
    res.x = candidate;
    res.relative_residual = r;
    res.iterations = step + 1;
  }
  return res;
}

/// All global dofs: prescribed values with the free solution inserted.
inline VectorXd full_solution(const SparseSystem& sys, const VectorXd& x_free) {
  VectorXd u = sys.prescribed;
  for (std::size_t k = 0; k < sys.free_dofs.size(); ++k) u[sys.free_dofs[k]] = x_free[k];
  return u;
}

}  // namespace vem3d

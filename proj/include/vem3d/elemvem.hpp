// Virtual element operators on a polyhedron.
//
// All three basis choices share one code path parameterized by whether the
// bulk basis and the face basis are L2-orthonormal:
//
//   standard    monomial bulk,     monomial faces
//   orthogonal  orthonormal bulk,  orthonormal faces
//   hybrid      orthonormal bulk,  monomial faces
//
// Bulk moments are taken against the bulk basis, face moments against the
// face basis of FaceOperators. Orthonormality is exploited exactly (identity
// mass matrices, expansions read off as L2 products), so the standard choice
// and the orthonormal choices differ numerically, not algebraically.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "vem3d/errors.hpp"
#include "vem3d/facevem.hpp"
#include "vem3d/mesh.hpp"
#include "vem3d/polybasis.hpp"
#include "vem3d/quadrature.hpp"

namespace vem3d {

enum class BasisChoice { standard, orthogonal, hybrid };
enum class Stabilization { S1, S2, S3 };

inline MomentBasis face_basis(BasisChoice c) {
  return c == BasisChoice::orthogonal ? MomentBasis::orthonormal : MomentBasis::monomial;
}
inline bool bulk_orthonormal(BasisChoice c) { return c != BasisChoice::standard; }

inline std::string to_string(BasisChoice c) {
  switch (c) {
    case BasisChoice::standard: return "standard";
    case BasisChoice::orthogonal: return "orthogonal";
    case BasisChoice::hybrid: return "hybrid";
  }
  return "?";
}
inline std::string to_string(Stabilization s) {
  switch (s) {
    case Stabilization::S1: return "S1";
    case Stabilization::S2: return "S2";
    case Stabilization::S3: return "S3";
  }
  return "?";
}
inline BasisChoice parse_basis_choice(std::string_view s) {
  if (s == "standard") return BasisChoice::standard;
  if (s == "orthogonal") return BasisChoice::orthogonal;
  if (s == "hybrid") return BasisChoice::hybrid;
  throw InvalidArgument("unknown basis choice '" + std::string(s) + "'");
}
inline Stabilization parse_stabilization(std::string_view s) {
  if (s == "S1" || s == "s1") return Stabilization::S1;
  if (s == "S2" || s == "s2") return Stabilization::S2;
  if (s == "S3" || s == "s3") return Stabilization::S3;
  throw InvalidArgument("unknown stabilization '" + std::string(s) + "'");
}

/// Element-local dof numbering: vertices (ascending global id), p-1 nodes on
/// each cell edge (ascending global edge id, nodes from the lower to the
/// higher vertex id), face moments per cell face, bulk moments.
struct ElementDofLayout {
  int p = 1;
  std::vector<int> vertices;
  std::vector<int> edges;
  std::vector<int> faces;
  std::vector<int> face_offset;  // first moment dof of each cell face
  int bulk_offset = 0;
  int num_skeletal = 0;
  int num_face = 0;
  int num_bulk = 0;
  int total = 0;
  std::vector<std::vector<int>> face_map;  // face-local dof -> element dof
  std::vector<Vec3> nodes;                 // skeletal dof coordinates

  bool is_bulk(int i) const { return i >= bulk_offset; }
  bool is_skeletal(int i) const { return i < num_skeletal; }
};

inline ElementDofLayout element_dof_layout(const PolyMesh& mesh, int c, int p) {
  if (c < 0 || c >= mesh.num_cells()) throw InvalidArgument("element_dof_layout: invalid cell id");
  if (p < 1) throw InvalidArgument("element_dof_layout: p must be >= 1");
  ElementDofLayout L;
  L.p = p;
  L.vertices = mesh.cell_geometry(c).vertices;
  L.edges = mesh.cell_edges(c);
  L.faces = mesh.cell(c).faces;
  const int nv = static_cast<int>(L.vertices.size());
  for (int v : L.vertices) L.nodes.push_back(mesh.vertex(v));
  for (int e : L.edges) {
    const auto& ev = mesh.edge(e);
    for (int j = 0; j < p - 1; ++j) L.nodes.push_back(edge_node(mesh.vertex(ev[0]), mesh.vertex(ev[1]), p, j));
  }
  L.num_skeletal = static_cast<int>(L.nodes.size());
  const int nf2 = dim_poly(p - 2, 2);
  int next = L.num_skeletal;
  for (std::size_t k = 0; k < L.faces.size(); ++k) {
    L.face_offset.push_back(next);
    next += nf2;
  }
  L.num_face = next - L.num_skeletal;
  L.bulk_offset = next;
  L.num_bulk = dim_poly(p - 2, 3);
  L.total = next + L.num_bulk;

  auto local_vertex = [&](int v) {
    return static_cast<int>(std::lower_bound(L.vertices.begin(), L.vertices.end(), v) - L.vertices.begin());
  };
  auto local_edge = [&](int e) {
    return static_cast<int>(std::lower_bound(L.edges.begin(), L.edges.end(), e) - L.edges.begin());
  };
  for (std::size_t k = 0; k < L.faces.size(); ++k) {
    const auto& face = mesh.face(L.faces[k]);
    std::vector<int> map;
    for (int v : face.vertices) map.push_back(local_vertex(v));
    for (int e : face.edges)
      for (int j = 0; j < p - 1; ++j) map.push_back(nv + local_edge(e) * (p - 1) + j);
    for (int g = 0; g < nf2; ++g) map.push_back(L.face_offset[k] + g);
    L.face_map.push_back(std::move(map));
  }
  return L;
}

struct ElementOperators {
  int cell = -1;
  int p = 1;
  BasisChoice choice = BasisChoice::standard;
  ElementDofLayout layout;
  ScaledMonomialBasis<3> monomials{0, Vec3::Zero(), 1.0};
  MatrixXd gs;  // bulk orthonormalizing coefficients (orthogonal, hybrid)
  double volume = 0.0;
  double diameter = 0.0;
  Vec3 barycenter = Vec3::Zero();

  MatrixXd G, Gtilde, B, D, H, C;
  MatrixXd pi_nabla;  // Pi* = G^-1 B
  MatrixXd pi_zero;   // H^-1 C

  int num_poly() const { return monomials.count(); }
  int num_dofs() const { return layout.total; }

  VectorXd basis_values(const Vec3& x) const {
    VectorXd m = monomials.eval(x);
    if (bulk_orthonormal(choice)) return gs * m;
    return m;
  }
  MatrixXd basis_gradients(const Vec3& x) const {
    MatrixXd g = monomials.gradient(x);
    if (bulk_orthonormal(choice)) return gs * g;
    return g;
  }
  /// Consistency part Pi*^T G~ Pi* of the local stiffness.
  MatrixXd consistency() const { return pi_nabla.transpose() * Gtilde * pi_nabla; }
};

/// Face operators for every face of the mesh in the face basis of `choice`.
inline std::vector<FaceOperators> build_face_operators(const PolyMesh& mesh, int p, BasisChoice choice) {
  std::vector<FaceOperators> out;
  out.reserve(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) out.push_back(face_operators(mesh, f, p, face_basis(choice)));
  return out;
}

inline ElementOperators element_operators(const PolyMesh& mesh, int c, int p, BasisChoice choice,
                                          const std::vector<FaceOperators>& face_ops) {
  if (c < 0 || c >= mesh.num_cells()) throw InvalidArgument("element_operators: invalid cell id");
  if (p < 1) throw InvalidArgument("element_operators: p must be >= 1");
  const auto& geom = mesh.cell_geometry(c);
  const auto& cell = mesh.cell(c);

  ElementOperators ops;
  ops.cell = c;
  ops.p = p;
  ops.choice = choice;
  ops.layout = element_dof_layout(mesh, c, p);
  ops.monomials = ScaledMonomialBasis<3>(p, geom.barycenter, geom.diameter);
  ops.volume = geom.volume;
  ops.diameter = geom.diameter;
  ops.barycenter = geom.barycenter;

  const auto& L = ops.layout;
  const int np = dim_poly(p, 3);
  const int n2 = dim_poly(p - 2, 3);
  const int ndof = L.total;
  const double vol = geom.volume;
  const bool ortho = bulk_orthonormal(choice);
  const bool face_ortho = face_basis(choice) == MomentBasis::orthonormal;

  const VolumeRule<3> rule = polyhedron_rule(mesh.oriented_faces(c), std::max(2 * p, 2));
  MatrixXd Hm = MatrixXd::Zero(np, np);
  MatrixXd Gm = MatrixXd::Zero(np, np);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const VectorXd m = ops.monomials.eval(rule.points[q]);
    const MatrixXd g = ops.monomials.gradient(rule.points[q]);
    Hm.noalias() += rule.weights[q] * m * m.transpose();
    Gm.noalias() += rule.weights[q] * g * g.transpose();
  }
  Hm = 0.5 * (Hm + Hm.transpose());

  MatrixXd P = MatrixXd::Identity(np, np);
  if (ortho) {
    try {
      ops.gs = gram_schmidt(Hm);
    } catch (const DegenerateDomain& e) {
      throw DegenerateElement(std::string("element_operators: cell ") + std::to_string(c) + ": " + e.what(), c, 0.0);
    }
    P = ops.gs;
  }
  ops.H = P * Hm * P.transpose();
  ops.Gtilde = P * Gm * P.transpose();
  const MatrixXd Hx = ortho ? MatrixXd::Identity(np, np) : Hm;

  // D: values at skeletal nodes, scaled face moments, scaled bulk moments.
  ops.D = MatrixXd::Zero(ndof, np);
  for (int i = 0; i < L.num_skeletal; ++i) ops.D.row(i) = ops.basis_values(L.nodes[i]).transpose();
  const int nf2 = dim_poly(p - 2, 2);
  const int nf1 = dim_poly(p - 1, 2);
  for (std::size_t k = 0; k < L.faces.size(); ++k) {
    const auto& fo = face_ops.at(L.faces[k]);
    if (fo.p != p || fo.basis != face_basis(choice))
      throw InvalidArgument("element_operators: face operators do not match p or basis choice");
    if (nf2 == 0) continue;
    const auto& frame = mesh.face_geometry(L.faces[k]).frame;
    MatrixXd Fm = MatrixXd::Zero(nf2, np);
    for (std::size_t q = 0; q < fo.rule.size(); ++q) {
      const VectorXd qf = fo.basis_values(fo.rule.points[q]).head(nf2);
      const VectorXd pv = ops.basis_values(frame.to_global(fo.rule.points[q]));
      Fm.noalias() += fo.rule.weights[q] * qf * pv.transpose();
    }
    ops.D.middleRows(L.face_offset[k], nf2) = Fm / fo.area;
  }
  for (int g = 0; g < n2; ++g) ops.D.row(L.bulk_offset + g) = Hx.row(g) / vol;

  // G: energy products; first row is the P0 condition.
  ops.G = ops.Gtilde;
  const int nv = static_cast<int>(L.vertices.size());
  if (p == 1) {
    VectorXd row = VectorXd::Zero(np);
    for (int i = 0; i < nv; ++i) row += ops.D.row(i).transpose();
    if (ortho) row /= nv;
    ops.G.row(0) = row.transpose();
  } else if (ortho) {
    ops.G.row(0).setZero();
    ops.G(0, 0) = 1.0 / (ops.gs(0, 0) * vol);
  } else {
    ops.G.row(0) = Hm.row(0);
  }

  // B: first row is P0, the others integrate by parts over the boundary.
  ops.B = MatrixXd::Zero(np, ndof);
  if (p == 1) {
    for (int i = 0; i < nv; ++i) ops.B(0, i) = ortho ? 1.0 / nv : 1.0;
  } else {
    ops.B(0, L.bulk_offset) = ortho ? 1.0 / ops.gs(0, 0) : vol;
  }
  for (std::size_t k = 0; k < L.faces.size(); ++k) {
    const auto& fo = face_ops[L.faces[k]];
    const auto& frame = mesh.face_geometry(L.faces[k]).frame;
    const Vec3 normal = static_cast<double>(cell.orientation[k]) * frame.normal;
    // Normal derivatives expanded in the face basis up to degree p-1.
    MatrixXd M = MatrixXd::Zero(np, nf1);
    for (std::size_t q = 0; q < fo.rule.size(); ++q) {
      const VectorXd qf = fo.basis_values(fo.rule.points[q]).head(nf1);
      const VectorXd dn = ops.basis_gradients(frame.to_global(fo.rule.points[q])) * normal;
      M.noalias() += fo.rule.weights[q] * dn * qf.transpose();
    }
    MatrixXd lambda;
    if (face_ortho) {
      lambda = M;
    } else {
      const MatrixXd Hf = fo.H.topLeftCorner(nf1, nf1);
      lambda = Hf.ldlt().solve(M.transpose()).transpose();
    }
    const auto& map = L.face_map[k];
    for (int b = 0; b < nf2; ++b)
      for (int al = 1; al < np; ++al) ops.B(al, L.face_offset[k] + b) += lambda(al, b) * fo.area;
    for (int b = nf2; b < nf1; ++b) {
      const VectorXd moment = fo.C.row(b).transpose();
      for (int j = 0; j < fo.layout.total; ++j)
        for (int al = 1; al < np; ++al) ops.B(al, map[j]) += lambda(al, b) * moment[j];
    }
  }
  if (n2 > 0) {
    MatrixXd mu;
    if (ortho) {
      const MatrixXd Lap = laplacian_matrix(ops.monomials, Hm);
      mu = ops.gs * Lap.leftCols(n2) * ops.gs.topLeftCorner(n2, n2).transpose();
    } else {
      mu = laplacian_expansion(ops.monomials);
    }
    for (int al = 1; al < np; ++al)
      for (int g = 0; g < n2; ++g) ops.B(al, L.bulk_offset + g) += vol * mu(al, g);
  }

  ops.pi_nabla = detail::pivoted_solve(ops.G, ops.B, c, "element_operators");

  // C: bulk moments below degree p-1, enhancement for the top two degrees.
  ops.C = MatrixXd::Zero(np, ndof);
  for (int g = 0; g < n2; ++g) ops.C(g, L.bulk_offset + g) = vol;
  if (ortho) {
    ops.C.bottomRows(np - n2) = ops.pi_nabla.bottomRows(np - n2);
    ops.pi_zero = ops.C;
  } else {
    ops.C.bottomRows(np - n2) = detail::enhanced_top_rows(Hm, ops.pi_nabla, ops.C, n2);
    ops.pi_zero = Hm.ldlt().solve(ops.C);
  }
  return ops;
}

/// Convenience overload building the face operators of this cell only.
inline ElementOperators element_operators(const PolyMesh& mesh, int c, int p, BasisChoice choice) {
  if (c < 0 || c >= mesh.num_cells()) throw InvalidArgument("element_operators: invalid cell id");
  std::vector<FaceOperators> face_ops(mesh.num_faces());
  for (int f : mesh.cell(c).faces) face_ops[f] = face_operators(mesh, f, p, face_basis(choice));
  return element_operators(mesh, c, p, choice, face_ops);
}

/// Diagonal of the stabilization matrix.
inline VectorXd stabilization_diagonal(const ElementOperators& ops, Stabilization kind) {
  const int n = ops.num_dofs();
  VectorXd s = VectorXd::Constant(n, ops.diameter);
  if (kind == Stabilization::S1) return s;
  const VectorXd a = ops.consistency().diagonal();
  for (int i = 0; i < n; ++i) s[i] = std::max(ops.diameter, a[i]);
  if (kind == Stabilization::S3)
    for (int i = ops.layout.bulk_offset; i < n; ++i) s[i] = 0.0;
  return s;
}

inline MatrixXd stabilization_matrix(const ElementOperators& ops, Stabilization kind) {
  return stabilization_diagonal(ops, kind).asDiagonal();
}

inline MatrixXd local_stiffness(const ElementOperators& ops, const MatrixXd& S) {
  const int n = ops.num_dofs();
  if (S.rows() != n || S.cols() != n) throw InvalidArgument("local_stiffness: stabilization size mismatch");
  const MatrixXd R = MatrixXd::Identity(n, n) - ops.D * ops.pi_nabla;
  return ops.consistency() + R.transpose() * S * R;
}

inline MatrixXd local_stiffness(const ElementOperators& ops, Stabilization kind) {
  return local_stiffness(ops, stabilization_matrix(ops, kind));
}

using ScalarField = std::function<double(const Vec3&)>;
using VectorField = std::function<Vec3(const Vec3&)>;

/// Load vector (f, Pi0 phi_i) using a rule exact to degree 2p+2.
inline VectorXd local_load(const PolyMesh& mesh, const ElementOperators& ops, const ScalarField& f) {
  const VolumeRule<3> rule = polyhedron_rule(mesh.oriented_faces(ops.cell), 2 * ops.p + 2);
  VectorXd moments = VectorXd::Zero(ops.num_poly());
  for (std::size_t q = 0; q < rule.size(); ++q)
    moments += rule.weights[q] * f(rule.points[q]) * ops.basis_values(rule.points[q]);
  return ops.pi_zero.transpose() * moments;
}

struct PollutionDiagnostics {
  double c_min = 0.0;
  double c_max = 0.0;
  double alpha = 0.0;
};

/// Extreme generalized Rayleigh quotients of the stabilization against the
/// consistency form on the Euclidean complement of the polynomial dof
/// vectors range(D). Degenerate complements give alpha = infinity.
inline PollutionDiagnostics pollution_diagnostics(const ElementOperators& ops, const MatrixXd& S) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int n = ops.num_dofs();
  const int np = ops.num_poly();
  PollutionDiagnostics out{0.0, inf, inf};
  if (n <= np) return out;
  Eigen::HouseholderQR<MatrixXd> qr(ops.D);
  const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, n);
  const MatrixXd U = Q.rightCols(n - np);
  const MatrixXd R = MatrixXd::Identity(n, n) - ops.D * ops.pi_nabla;
  const MatrixXd Su = U.transpose() * (R.transpose() * S * R) * U;
  const MatrixXd Ku = U.transpose() * ops.consistency() * U;
  Eigen::SelfAdjointEigenSolver<MatrixXd> ek(0.5 * (Ku + Ku.transpose()));
  const VectorXd lam = ek.eigenvalues();
  const double tol = 1e-12 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  std::vector<int> keep;
  for (int i = 0; i < lam.size(); ++i)
    if (lam[i] > tol) keep.push_back(i);
  if (keep.empty()) return out;
  MatrixXd Z(n - np, static_cast<int>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    Z.col(j) = ek.eigenvectors().col(keep[j]) / std::sqrt(lam[keep[j]]);
  const MatrixXd T = Z.transpose() * Su * Z;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (T + T.transpose()), Eigen::EigenvaluesOnly);
  out.c_min = es.eigenvalues().minCoeff();
  out.c_max = es.eigenvalues().maxCoeff();
  if (!(out.c_min > 0.0)) return {out.c_min, out.c_max, inf};
  out.alpha = std::max(1.0, out.c_max) / std::min(1.0, out.c_min);
  return out;
}

}  // namespace vem3d

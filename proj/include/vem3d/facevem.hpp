// Enhanced virtual element space on a single polygonal face, in the face's
// local frame: degrees of freedom, the matrices D, B, G, G~, H, C and the
// energy (Pi-nabla) and L2 (Pi-zero) projector coefficient matrices.
//
// The face polynomial basis is either the scaled monomials or their
// L2(F)-orthonormalization; the same basis is used for the face moments and
// for expressing projections. Orthonormality is then used exactly: the face
// mass matrix is the identity, expansion coefficients are plain L2 products.
#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "vem3d/errors.hpp"
#include "vem3d/mesh.hpp"
#include "vem3d/polybasis.hpp"
#include "vem3d/quadrature.hpp"

namespace vem3d {

enum class MomentBasis { monomial, orthonormal };

/// Face-local dof numbering: cycle vertices, then p-1 Gauss-Lobatto nodes per
/// face edge (ordered from the lower to the higher global vertex id), then
/// dim_poly(p-2) scaled moments.
struct FaceDofLayout {
  int p = 1;
  std::vector<int> vertex_dofs;
  std::vector<std::vector<int>> edge_dofs;
  std::vector<int> moment_dofs;
  std::vector<Vec3> nodes;  // skeletal dof coordinates (vertices, then edge nodes)
  int total = 0;

  int num_skeletal() const { return static_cast<int>(nodes.size()); }
};

/// Position of the interior Gauss-Lobatto node j on the edge from a to b.
inline Vec3 edge_node(const Vec3& a, const Vec3& b, int p, int j) {
  const double t = gauss_lobatto_1d(p + 1).nodes[j + 1];
  return a + 0.5 * (t + 1.0) * (b - a);
}

inline FaceDofLayout face_dof_layout(const PolyMesh& mesh, int f, int p) {
  if (p < 1) throw InvalidArgument("face_dof_layout: p must be >= 1");
  const auto& face = mesh.face(f);
  const int nv = static_cast<int>(face.vertices.size());
  FaceDofLayout layout;
  layout.p = p;
  for (int i = 0; i < nv; ++i) {
    layout.vertex_dofs.push_back(i);
    layout.nodes.push_back(mesh.vertex(face.vertices[i]));
  }
  int next = nv;
  for (int k = 0; k < nv; ++k) {
    const auto& e = mesh.edge(face.edges[k]);
    std::vector<int> ids;
    for (int j = 0; j < p - 1; ++j) {
      ids.push_back(next++);
      layout.nodes.push_back(edge_node(mesh.vertex(e[0]), mesh.vertex(e[1]), p, j));
    }
    layout.edge_dofs.push_back(std::move(ids));
  }
  for (int g = 0; g < dim_poly(p - 2, 2); ++g) layout.moment_dofs.push_back(next++);
  layout.total = next;
  return layout;
}

namespace detail {

/// Solves G X = B with full pivoting; rejects numerically singular G.
inline MatrixXd pivoted_solve(const MatrixXd& G, const MatrixXd& B, int owner, const char* what) {
  Eigen::FullPivLU<MatrixXd> lu(G);
  const double max_diag = G.diagonal().cwiseAbs().maxCoeff();
  const auto u = lu.matrixLU().diagonal().cwiseAbs();
  const double min_pivot = u.size() ? u.minCoeff() : 0.0;
  if (!(min_pivot > 1e-14 * max_diag))
    throw DegenerateElement(std::string(what) + ": singular projector matrix (id " + std::to_string(owner) +
                                ", pivot " + std::to_string(min_pivot) + ")",
                            owner, min_pivot);
  return lu.solve(B);
}

/// Top rows of C for a non-orthonormal basis with mass matrix H. The
/// enhancement acts on the L2-orthogonal complement of the first n2 members,
/// which is the span of the top orthonormal members, so every basis choice
/// defines the same space. Low-degree moments are the first n2 rows of C.
inline MatrixXd enhanced_top_rows(const MatrixXd& H, const MatrixXd& pi_nabla, const MatrixXd& C, int n2) {
  const int np = static_cast<int>(H.rows());
  if (n2 == 0) return H * pi_nabla;
  const MatrixXd coupling =
      H.topLeftCorner(n2, n2).ldlt().solve(H.topRightCorner(n2, np - n2)).transpose();
  return (H.bottomRows(np - n2) - coupling * H.topRows(n2)) * pi_nabla + coupling * C.topRows(n2);
}

}  // namespace detail

struct FaceOperators {
  int face = -1;
  int p = 1;
  MomentBasis basis = MomentBasis::monomial;
  FaceDofLayout layout;
  ScaledMonomialBasis<2> monomials{0, Vec2::Zero(), 1.0};
  MatrixXd gs;  // orthonormalizing coefficients (orthonormal basis only)
  double area = 0.0;
  VolumeRule<2> rule;  // local-frame rule, exact to degree 2p

  MatrixXd D, G, Gtilde, B, H, C;
  MatrixXd pi_nabla;  // n_p^F x N_dof^F, coefficients in the face basis
  MatrixXd pi_zero;

  int num_poly() const { return monomials.count(); }

  /// Face basis values at a local point (monomials or orthonormal).
  VectorXd basis_values(const Vec2& xi) const {
    VectorXd m = monomials.eval(xi);
    if (basis == MomentBasis::orthonormal) return gs * m;
    return m;
  }
  MatrixXd basis_gradients(const Vec2& xi) const {
    MatrixXd g = monomials.gradient(xi);
    if (basis == MomentBasis::orthonormal) return gs * g;
    return g;
  }

  /// Mass matrix of the face basis as used by the method: identity for the
  /// orthonormal basis, the monomial mass otherwise.
  MatrixXd exact_mass() const {
    if (basis == MomentBasis::orthonormal) return MatrixXd::Identity(num_poly(), num_poly());
    return H;
  }
};

inline FaceOperators face_operators(const PolyMesh& mesh, int f, int p, MomentBasis basis) {
  if (f < 0 || f >= mesh.num_faces()) throw InvalidArgument("face_operators: invalid face id");
  if (p < 1) throw InvalidArgument("face_operators: p must be >= 1");
  const auto& geom = mesh.face_geometry(f);
  const auto& face = mesh.face(f);
  const int nv = static_cast<int>(face.vertices.size());

  FaceOperators ops;
  ops.face = f;
  ops.p = p;
  ops.basis = basis;
  ops.layout = face_dof_layout(mesh, f, p);
  ops.monomials = ScaledMonomialBasis<2>(p, Vec2::Zero(), geom.frame.diameter);
  ops.area = geom.area;
  ops.rule = polygon_rule(geom.local_vertices, std::max(2 * p, 2));

  const int np = dim_poly(p, 2);
  const int n2 = dim_poly(p - 2, 2);
  const int ndof = ops.layout.total;
  const double area = geom.area;
  const bool ortho = basis == MomentBasis::orthonormal;

  MatrixXd Hm = MatrixXd::Zero(np, np);
  MatrixXd Gm = MatrixXd::Zero(np, np);
  for (std::size_t q = 0; q < ops.rule.size(); ++q) {
    const VectorXd m = ops.monomials.eval(ops.rule.points[q]);
    const MatrixXd g = ops.monomials.gradient(ops.rule.points[q]);
    Hm.noalias() += ops.rule.weights[q] * m * m.transpose();
    Gm.noalias() += ops.rule.weights[q] * g * g.transpose();
  }
  Hm = 0.5 * (Hm + Hm.transpose());

  MatrixXd Q = MatrixXd::Identity(np, np);
  if (ortho) {
    ops.gs = gram_schmidt(Hm);
    Q = ops.gs;
  }
  ops.H = Q * Hm * Q.transpose();
  ops.Gtilde = Q * Gm * Q.transpose();
  const MatrixXd Hx = ops.exact_mass();

  // D: skeletal node values and scaled moments of each basis polynomial.
  ops.D = MatrixXd::Zero(ndof, np);
  for (int i = 0; i < ops.layout.num_skeletal(); ++i)
    ops.D.row(i) = ops.basis_values(geom.frame.to_local(ops.layout.nodes[i])).transpose();
  for (int g = 0; g < n2; ++g) ops.D.row(ops.layout.moment_dofs[g]) = Hx.row(g) / area;

  // G: energy products with the P0 condition in the first row.
  ops.G = ops.Gtilde;
  if (p == 1) {
    VectorXd row = VectorXd::Zero(np);
    for (int i = 0; i < nv; ++i) row += ops.D.row(i).transpose();
    if (ortho) row /= nv;
    ops.G.row(0) = row.transpose();
  } else if (ortho) {
    ops.G.row(0).setZero();
    ops.G(0, 0) = 1.0 / (ops.gs(0, 0) * area);
  } else {
    ops.G.row(0) = Hm.row(0);
  }

  // B: first row realizes P0, the others integrate by parts.
  ops.B = MatrixXd::Zero(np, ndof);
  if (p == 1) {
    for (int i = 0; i < nv; ++i) ops.B(0, i) = ortho ? 1.0 / nv : 1.0;
  } else {
    ops.B(0, ops.layout.moment_dofs[0]) = ortho ? 1.0 / ops.gs(0, 0) : area;
  }
  const auto& gl = gauss_lobatto_1d(p + 1);
  for (int k = 0; k < nv; ++k) {
    const Vec2& a = geom.local_vertices[k];
    const Vec2& b = geom.local_vertices[(k + 1) % nv];
    const Vec2 t = b - a;
    const double len = t.norm();
    const Vec2 normal(t[1] / len, -t[0] / len);
    const auto& e = mesh.edge(face.edges[k]);
    const bool forward = face.vertices[k] == e[0];
    for (int j = 0; j <= p; ++j) {
      int dof;
      if (j == 0) {
        dof = k;
      } else if (j == p) {
        dof = (k + 1) % nv;
      } else {
        dof = ops.layout.edge_dofs[k][forward ? j - 1 : p - 1 - j];
      }
      const Vec2 x = a + 0.5 * (gl.nodes[j] + 1.0) * t;
      const VectorXd dn = ops.basis_gradients(x) * normal;
      const double w = 0.5 * gl.weights[j] * len;
      for (int al = 1; al < np; ++al) ops.B(al, dof) += w * dn[al];
    }
  }
  if (n2 > 0) {
    MatrixXd mu;  // -Laplacian of basis polynomial alpha in the moment basis
    if (ortho) {
      const MatrixXd L = laplacian_matrix(ops.monomials, Hm);
      mu = ops.gs * L.leftCols(n2) * ops.gs.topLeftCorner(n2, n2).transpose();
    } else {
      mu = laplacian_expansion(ops.monomials);
    }
    for (int al = 1; al < np; ++al)
      for (int g = 0; g < n2; ++g) ops.B(al, ops.layout.moment_dofs[g]) += area * mu(al, g);
  }

  try {
    ops.pi_nabla = detail::pivoted_solve(ops.G, ops.B, f, "face_operators");
  } catch (const DegenerateElement& e) {
    throw DegenerateDomain(std::string(e.what()) + " on face " + std::to_string(f));
  }

  // C: moments below degree p-1 are dofs, the top two degrees come from the
  // enhancement constraint (moments equal those of the energy projection).
  ops.C = MatrixXd::Zero(np, ndof);
  for (int g = 0; g < n2; ++g) ops.C(g, ops.layout.moment_dofs[g]) = area;
  if (ortho) {
    ops.C.bottomRows(np - n2) = ops.pi_nabla.bottomRows(np - n2);
    ops.pi_zero = ops.C;
  } else {
    ops.C.bottomRows(np - n2) = detail::enhanced_top_rows(Hm, ops.pi_nabla, ops.C, n2);
    ops.pi_zero = Hm.ldlt().solve(ops.C);
  }
  return ops;
}

/// Coefficients of the energy projection of a face dof vector.
inline VectorXd face_pi_nabla_apply(const FaceOperators& ops, const VectorXd& dofs) {
  if (dofs.size() != ops.layout.total)
    throw InvalidArgument("face_pi_nabla_apply: dof vector has length " + std::to_string(dofs.size()) +
                          ", expected " + std::to_string(ops.layout.total));
  return ops.pi_nabla * dofs;
}

}  // namespace vem3d

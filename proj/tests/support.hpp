// Shared fixtures and independent oracles for the test suite.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "vem3d/vem3d.hpp"

namespace vem3d::testing {

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

/// Integral of x^a y^b z^c over the box [lo, hi].
inline double box_moment(const Vec3& lo, const Vec3& hi, int a, int b, int c) {
  auto one = [](double l, double h, int k) { return (std::pow(h, k + 1) - std::pow(l, k + 1)) / (k + 1); };
  return one(lo[0], hi[0], a) * one(lo[1], hi[1], b) * one(lo[2], hi[2], c);
}

/// Integral of x^a y^b z^c over the unit simplex conv(0, e1, e2, e3).
inline double simplex_moment(int a, int b, int c) {
  return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
}

/// Integral of x^a y^b over the unit triangle conv(0, e1, e2).
inline double triangle_moment(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

inline PolyMesh single_cell(std::vector<Vec3> vertices, std::vector<std::vector<int>> faces) {
  std::vector<int> all(faces.size());
  for (std::size_t k = 0; k < faces.size(); ++k) all[k] = static_cast<int>(k);
  return PolyMesh::from_unoriented(std::move(vertices), std::move(faces), {all});
}

inline PolyMesh unit_cube_cell() { return build_cube_mesh(1); }

inline PolyMesh tetrahedron_cell(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return single_cell({a, b, c, d}, {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}});
}

inline PolyMesh reference_tetrahedron() {
  return tetrahedron_cell({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1});
}

/// Triangular prism over (0,0),(1,0),(0,1) with height 1.
inline PolyMesh wedge_cell() {
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {0, 1, 1}};
  return single_cell(v, {{0, 2, 1}, {3, 4, 5}, {0, 1, 4, 3}, {1, 2, 5, 4}, {2, 0, 3, 5}});
}

/// Nonconvex L-shaped prism: the unit square minus [0.5,1]^2, extruded.
inline PolyMesh l_prism_cell() {
  const std::vector<Vec2> base = {{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}};
  std::vector<Vec3> v;
  for (const auto& b : base) v.emplace_back(b[0], b[1], 0.0);
  for (const auto& b : base) v.emplace_back(b[0], b[1], 1.0);
  std::vector<std::vector<int>> faces = {{5, 4, 3, 2, 1, 0}, {6, 7, 8, 9, 10, 11}};
  for (int k = 0; k < 6; ++k) faces.push_back({k, (k + 1) % 6, 6 + (k + 1) % 6, 6 + k});
  return single_cell(v, faces);
}

/// Octahedron of the collapsing mesh at a given level, as a single cell.
inline PolyMesh collapsing_octahedron(int level) {
  const PolyMesh m = build_collapsing_mesh(level);
  std::vector<Vec3> verts;
  std::vector<int> map(m.num_vertices(), -1);
  std::vector<std::vector<int>> faces;
  for (int f : m.cell(0).faces) {
    std::vector<int> cyc;
    for (int v : m.face(f).vertices) {
      if (map[v] < 0) {
        map[v] = static_cast<int>(verts.size());
        verts.push_back(m.vertex(v));
      }
      cyc.push_back(map[v]);
    }
    faces.push_back(cyc);
  }
  return single_cell(verts, faces);
}

/// 2x2x2 cube mesh under a fixed affine map (faces stay planar).
inline PolyMesh affine_cube_mesh() {
  const PolyMesh base = build_cube_mesh(2);
  std::vector<Vec3> v = base.vertices();
  Eigen::Matrix3d A;
  A << 1.0, 0.2, 0.1, 0.05, 0.9, 0.15, -0.1, 0.05, 1.1;
  for (auto& x : v) x = A * x + Vec3(0.3, -0.2, 0.1);
  std::vector<std::vector<int>> faces;
  for (const auto& f : base.faces()) faces.push_back(f.vertices);
  return PolyMesh::from_signed(v, faces, base.cells());
}

/// P1 finite element stiffness of a tetrahedron, from barycentric gradients.
inline Eigen::Matrix4d fem_p1_stiffness(const std::array<Vec3, 4>& x) {
  Eigen::Matrix4d M;
  for (int i = 0; i < 4; ++i) M.row(i) << 1.0, x[i][0], x[i][1], x[i][2];
  const Eigen::Matrix4d C = M.inverse();  // columns: coefficients of barycentric functions
  Eigen::Matrix<double, 3, 4> grads = C.bottomRows(3);
  const double vol = std::abs(M.determinant()) / 6.0;
  return vol * grads.transpose() * grads;
}

/// Dense symmetric eigenvalue extremes.
inline std::pair<double, double> dense_extremes(const SparseMatrix& A) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(MatrixXd(A), Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

/// Polynomial with given 3D monomial coefficients about a center and scale.
struct MonomialFunction {
  std::vector<std::array<int, 3>> exps;
  std::vector<double> coef;
  double operator()(const Vec3& x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < exps.size(); ++k)
      s += coef[k] * std::pow(x[0], exps[k][0]) * std::pow(x[1], exps[k][1]) * std::pow(x[2], exps[k][2]);
    return s;
  }
};

inline MonomialFunction random_polynomial(int p, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  MonomialFunction f;
  for (int a = 0; a <= p; ++a)
    for (int b = 0; a + b <= p; ++b)
      for (int c = 0; a + b + c <= p; ++c) {
        f.exps.push_back({a, b, c});
        f.coef.push_back(U(rng));
      }
  return f;
}

/// Element dof vector of a function, with face moments in the face bases of
/// `faces` and bulk moments in the element basis.
inline VectorXd element_interpolant(const PolyMesh& mesh, const ElementOperators& ops,
                                    const std::vector<FaceOperators>& faces, const ScalarField& u) {
  const auto& L = ops.layout;
  VectorXd d = VectorXd::Zero(L.total);
  for (int i = 0; i < L.num_skeletal; ++i) d[i] = u(L.nodes[i]);
  const int nf2 = dim_poly(ops.p - 2, 2);
  for (std::size_t k = 0; k < L.faces.size(); ++k) {
    const VectorXd m = detail::face_moments(mesh, faces.at(L.faces[k]), u);
    for (int g = 0; g < nf2; ++g) d[L.face_offset[k] + g] = m[g];
  }
  const int n2 = L.num_bulk;
  if (n2 > 0) {
    const auto rule = polyhedron_rule(mesh.oriented_faces(ops.cell), 2 * ops.p + 2);
    VectorXd m = VectorXd::Zero(n2);
    for (std::size_t q = 0; q < rule.size(); ++q)
      m += rule.weights[q] * u(rule.points[q]) * ops.basis_values(rule.points[q]).head(n2);
    d.tail(n2) = m / ops.volume;
  }
  return d;
}

inline double smooth_field(const Vec3& x) {
  return std::sin(1.3 * x[0] + 0.4) * std::exp(0.7 * x[1]) + std::cos(2.0 * x[2]) * x[0];
}

inline constexpr std::array<BasisChoice, 3> kChoices = {BasisChoice::standard, BasisChoice::orthogonal,
                                                        BasisChoice::hybrid};

}  // namespace vem3d::testing

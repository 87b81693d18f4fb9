#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace vem3d;
using namespace vem3d::testing;

namespace {

constexpr std::array<MomentBasis, 2> kBases = {MomentBasis::monomial, MomentBasis::orthonormal};

/// Pentagonal prism: pentagon in z = 0 and z = 1 with five quads.
PolyMesh pentagon_prism(int shift = 0) {
  std::vector<Vec3> v;
  for (int h = 0; h < 2; ++h)
    for (int k = 0; k < 5; ++k) {
      const double t = 2.0 * std::numbers::pi * k / 5.0 + 0.3;
      v.emplace_back(0.6 * std::cos(t) + 0.1 * (k == 2), 0.5 * std::sin(t), h);
    }
  std::vector<int> bottom = {4, 3, 2, 1, 0};
  std::rotate(bottom.begin(), bottom.begin() + shift, bottom.end());
  std::vector<std::vector<int>> faces = {bottom, {5, 6, 7, 8, 9}};
  for (int k = 0; k < 5; ++k) faces.push_back({k, (k + 1) % 5, 5 + (k + 1) % 5, 5 + k});
  return single_cell(v, faces);
}

/// Face dof vector of a function: point values at skeletal nodes and scaled moments.
VectorXd face_interpolant(const PolyMesh& mesh, const FaceOperators& ops, const ScalarField& u) {
  VectorXd d(ops.layout.total);
  for (int i = 0; i < ops.layout.num_skeletal(); ++i) d[i] = u(ops.layout.nodes[i]);
  const VectorXd m = detail::face_moments(mesh, ops, u);
  for (std::size_t g = 0; g < ops.layout.moment_dofs.size(); ++g) d[ops.layout.moment_dofs[g]] = m[g];
  return d;
}

double smooth(const Vec3& x) { return std::sin(1.3 * x[0] + 0.4) * std::exp(0.7 * x[1]) + x[2] * x[0]; }

}  // namespace

TEST(FaceLayout, DofCounts) {
  const PolyMesh cube = unit_cube_cell();
  EXPECT_EQ(face_dof_layout(cube, 0, 1).total, 4);
  EXPECT_EQ(face_dof_layout(cube, 0, 2).total, 9);
  const PolyMesh prism = pentagon_prism();
  EXPECT_EQ(face_dof_layout(prism, 0, 3).total, 18);
  EXPECT_EQ(face_dof_layout(prism, 0, 3).num_skeletal(), 15);
  EXPECT_THROW(face_dof_layout(prism, 0, 0), InvalidArgument);
}

TEST(FaceLayout, EdgeNodesAreGaussLobatto) {
  const Vec3 a(0, 0, 0), b(2, 0, 0);
  const auto& gl = gauss_lobatto_1d(4);
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(edge_node(a, b, 3, j)[0], gl.nodes[j + 1] + 1.0, 1e-15);
}

TEST(FaceOperators, SquareLinearConstantColumn) {
  const PolyMesh cube = unit_cube_cell();
  const FaceOperators ops = face_operators(cube, 0, 1, MomentBasis::monomial);
  EXPECT_EQ(ops.D.rows(), 4);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(ops.D(i, 0), 1.0);
  EXPECT_THROW(face_operators(cube, 6, 1, MomentBasis::monomial), InvalidArgument);
}

TEST(FaceOperators, ProjectorReproducesPolynomials) {
  const std::vector<PolyMesh> meshes = {unit_cube_cell(), pentagon_prism(), l_prism_cell(), reference_tetrahedron()};
  for (const auto& mesh : meshes)
    for (int f = 0; f < mesh.num_faces(); ++f)
      for (int p = 1; p <= 5; ++p)
        for (MomentBasis basis : kBases) {
          const FaceOperators ops = face_operators(mesh, f, p, basis);
          const int np = ops.num_poly();
          EXPECT_LE((ops.pi_nabla * ops.D - MatrixXd::Identity(np, np)).cwiseAbs().maxCoeff(), 1e-10);
          EXPECT_LE((ops.G - ops.B * ops.D).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, ops.G.cwiseAbs().maxCoeff()));
          // Monomial mass matrices on triangles lose about seven digits at p = 5.
          const double tol = basis == MomentBasis::monomial && p == 5 ? 1e-6 : 1e-9;
          EXPECT_LE((ops.pi_zero * ops.D - MatrixXd::Identity(np, np)).cwiseAbs().maxCoeff(), tol);
        }
}

TEST(FaceOperators, ApplyOnPolynomialDofs) {
  const PolyMesh mesh = pentagon_prism();
  for (MomentBasis basis : kBases) {
    const FaceOperators ops = face_operators(mesh, 0, 3, basis);
    for (int a = 0; a < ops.num_poly(); ++a) {
      const VectorXd c = face_pi_nabla_apply(ops, ops.D.col(a));
      VectorXd e = VectorXd::Zero(ops.num_poly());
      e[a] = 1.0;
      EXPECT_LE((c - e).cwiseAbs().maxCoeff(), 1e-10);
    }
    EXPECT_THROW(face_pi_nabla_apply(ops, VectorXd::Zero(3)), InvalidArgument);
  }
}

TEST(FaceOperators, EnergyOrthogonalityResidual) {
  const PolyMesh mesh = pentagon_prism();
  std::mt19937 rng(3);
  std::normal_distribution<double> N;
  for (MomentBasis basis : kBases) {
    const FaceOperators ops = face_operators(mesh, 2, 4, basis);
    VectorXd v(ops.layout.total);
    for (int i = 0; i < v.size(); ++i) v[i] = N(rng);
    const VectorXd c = face_pi_nabla_apply(ops, v);
    EXPECT_LE((ops.G * c - ops.B * v).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(FaceOperators, PiZeroAgainstLeastSquares) {
  const PolyMesh cube = unit_cube_cell();
  const FaceOperators ops = face_operators(cube, 0, 2, MomentBasis::monomial);
  VectorXd e1 = VectorXd::Zero(ops.layout.total);
  e1[0] = 1.0;
  const VectorXd oracle = ops.H.colPivHouseholderQr().solve(ops.C * e1);
  EXPECT_LE((ops.pi_zero * e1 - oracle).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FaceOperators, OrthonormalMomentBlockIsScaledIdentity) {
  const PolyMesh mesh = pentagon_prism();
  for (int p = 2; p <= 5; ++p) {
    const FaceOperators ops = face_operators(mesh, 0, p, MomentBasis::orthonormal);
    const int n2 = dim_poly(p - 2, 2);
    MatrixXd block(n2, n2);
    for (int g = 0; g < n2; ++g) block.row(g) = ops.D.row(ops.layout.moment_dofs[g]).head(n2);
    EXPECT_LE((block * ops.area - MatrixXd::Identity(n2, n2)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((ops.H - MatrixXd::Identity(ops.num_poly(), ops.num_poly())).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(FaceOperators, LinearCaseUsesVertexAverage) {
  const PolyMesh mesh = pentagon_prism();
  for (MomentBasis basis : kBases) {
    const FaceOperators ops = face_operators(mesh, 0, 1, basis);
    const double expected = basis == MomentBasis::monomial ? 1.0 : 0.2;
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(ops.B(0, i), expected, 1e-15);
    // The mean of the projection at the vertices matches the mean of the data.
    VectorXd v(5);
    v << 1.0, -2.0, 0.5, 3.0, 0.25;
    const VectorXd c = face_pi_nabla_apply(ops, v);
    EXPECT_NEAR((ops.D * c).mean(), v.mean(), 1e-12);
  }
}

TEST(FaceOperators, FrameInvariance) {
  // Shifting the vertex cycle of face 0 changes its local frame but not the
  // projections viewed as functions on the face.
  for (int p = 1; p <= 4; ++p)
    for (MomentBasis basis : kBases) {
      const PolyMesh m0 = pentagon_prism(0);
      const PolyMesh m1 = pentagon_prism(2);
      const auto& g0 = m0.face_geometry(0);
      const auto& g1 = m1.face_geometry(0);
      ASSERT_GT((g0.frame.axes[0] - g1.frame.axes[0]).norm(), 1e-3);
      const FaceOperators o0 = face_operators(m0, 0, p, basis);
      const FaceOperators o1 = face_operators(m1, 0, p, basis);
      const VectorXd c0n = o0.pi_nabla * face_interpolant(m0, o0, smooth);
      const VectorXd c1n = o1.pi_nabla * face_interpolant(m1, o1, smooth);
      const VectorXd c0z = o0.pi_zero * face_interpolant(m0, o0, smooth);
      const VectorXd c1z = o1.pi_zero * face_interpolant(m1, o1, smooth);
      for (std::size_t q = 0; q < o0.rule.size(); ++q) {
        const Vec3 x = g0.frame.to_global(o0.rule.points[q]);
        const Vec2 y = g1.frame.to_local(x);
        EXPECT_NEAR(o0.basis_values(o0.rule.points[q]).dot(c0n), o1.basis_values(y).dot(c1n), 1e-9);
        EXPECT_NEAR(o0.basis_values(o0.rule.points[q]).dot(c0z), o1.basis_values(y).dot(c1z), 1e-9);
      }
    }
}

TEST(FaceOperators, BasisChoiceDoesNotChangeProjection) {
  const PolyMesh mesh = l_prism_cell();
  for (int p = 1; p <= 4; ++p) {
    const FaceOperators a = face_operators(mesh, 0, p, MomentBasis::monomial);
    const FaceOperators b = face_operators(mesh, 0, p, MomentBasis::orthonormal);
    const VectorXd ca = a.pi_nabla * face_interpolant(mesh, a, smooth);
    const VectorXd cb = b.pi_nabla * face_interpolant(mesh, b, smooth);
    for (std::size_t q = 0; q < a.rule.size(); ++q)
      EXPECT_NEAR(a.basis_values(a.rule.points[q]).dot(ca), b.basis_values(a.rule.points[q]).dot(cb), 1e-9);
  }
}

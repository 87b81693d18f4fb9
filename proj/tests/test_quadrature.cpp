#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace vem3d;
using namespace vem3d::testing;

TEST(Gauss, SmallRules) {
  const auto& g1 = gauss_1d(1);
  ASSERT_EQ(g1.nodes.size(), 1u);
  EXPECT_NEAR(g1.nodes[0], 0.0, 1e-15);
  EXPECT_NEAR(g1.weights[0], 2.0, 1e-15);
  const auto& g2 = gauss_1d(2);
  EXPECT_NEAR(std::abs(g2.nodes[0]), 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(g2.nodes[0], -g2.nodes[1], 1e-15);
  EXPECT_NEAR(g2.weights[0], 1.0, 1e-15);
  EXPECT_NEAR(g2.weights[1], 1.0, 1e-15);
  EXPECT_THROW(gauss_1d(0), InvalidArgument);
}

TEST(Gauss, EightPointExactness) {
  const auto& g = gauss_1d(8);
  double s15 = 0.0, s14 = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    s15 += g.weights[i] * std::pow(g.nodes[i], 15);
    s14 += g.weights[i] * std::pow(g.nodes[i], 14);
  }
  EXPECT_NEAR(s15, 0.0, 1e-13);
  EXPECT_NEAR(s14, 2.0 / 15.0, 1e-13);
}

TEST(GaussLobatto, SmallRules) {
  const auto& l2 = gauss_lobatto_1d(2);
  EXPECT_EQ(l2.nodes.front(), -1.0);
  EXPECT_EQ(l2.nodes.back(), 1.0);
  EXPECT_NEAR(l2.weights[0], 1.0, 1e-15);
  const auto& l3 = gauss_lobatto_1d(3);
  EXPECT_NEAR(l3.nodes[1], 0.0, 1e-15);
  EXPECT_NEAR(l3.weights[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(l3.weights[1], 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(l3.weights[2], 1.0 / 3.0, 1e-15);
  EXPECT_THROW(gauss_lobatto_1d(1), InvalidArgument);
}

TEST(GaussLobatto, ElevenPointsSymmetricAndExact) {
  const auto& l = gauss_lobatto_1d(11);
  ASSERT_EQ(l.nodes.size(), 11u);
  for (int i = 0; i < 11; ++i) {
    EXPECT_NEAR(l.nodes[i], -l.nodes[10 - i], 1e-13);
    EXPECT_NEAR(l.weights[i], l.weights[10 - i], 1e-13);
  }
  for (int k = 0; k <= 2 * 11 - 3; ++k) {
    double s = 0.0;
    for (int i = 0; i < 11; ++i) s += l.weights[i] * std::pow(l.nodes[i], k);
    EXPECT_NEAR(s, k % 2 ? 0.0 : 2.0 / (k + 1), 1e-13) << "degree " << k;
  }
}

TEST(Rules, PositiveWeights) {
  for (int n = 1; n <= 12; ++n)
    for (double w : gauss_1d(n).weights) EXPECT_GT(w, 0.0);
  for (int n = 2; n <= 12; ++n)
    for (double w : gauss_lobatto_1d(n).weights) EXPECT_GT(w, 0.0);
}

namespace {

double integrate2(const VolumeRule<2>& r, int a, int b) {
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q][0], a) * std::pow(r.points[q][1], b);
  return s;
}

double integrate3(const VolumeRule<3>& r, int a, int b, int c) {
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q)
    s += r.weights[q] * std::pow(r.points[q][0], a) * std::pow(r.points[q][1], b) * std::pow(r.points[q][2], c);
  return s;
}

}  // namespace

TEST(PolygonRule, UnitSquare) {
  const std::vector<Vec2> sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto r = polygon_rule(sq, 2);
  EXPECT_NEAR(integrate2(r, 0, 0), 1.0, 1e-14);
  EXPECT_NEAR(integrate2(r, 1, 0), 0.5, 1e-14);
  EXPECT_NEAR(r.measure(), 1.0, 1e-14);
}

TEST(PolygonRule, NonconvexLShape) {
  const std::vector<Vec2> L = {{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}};
  const auto r = polygon_rule(L, 4);
  // Decomposition into [0,1]x[0,0.5] and [0,0.5]x[0.5,1].
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b) {
      const double exact = box_moment({0, 0, 0}, {1, 0.5, 1}, a, b, 0) + box_moment({0, 0.5, 0}, {0.5, 1, 1}, a, b, 0);
      EXPECT_NEAR(integrate2(r, a, b), exact, 1e-12);
    }
  EXPECT_NEAR(r.measure(), 0.75, 1e-14);
}

TEST(PolygonRule, TriangleExactnessSweep) {
  const std::vector<Vec2> tri = {{0, 0}, {1, 0}, {0, 1}};
  for (int deg = 0; deg <= 20; ++deg) {
    const auto r = polygon_rule(tri, deg);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        const double exact = triangle_moment(a, b);
        EXPECT_NEAR(integrate2(r, a, b), exact, 1e-11 * exact) << deg << " " << a << " " << b;
      }
  }
}

TEST(PolyhedronRule, UnitCube) {
  const PolyMesh m = unit_cube_cell();
  const auto r = polyhedron_rule(m.oriented_faces(0), 2);
  EXPECT_NEAR(integrate3(r, 0, 0, 0), 1.0, 1e-14);
  EXPECT_NEAR(integrate3(r, 2, 0, 0), 1.0 / 3.0, 1e-14);
}

TEST(PolyhedronRule, ExactnessSweepCubeAndSimplex) {
  const PolyMesh cube = unit_cube_cell();
  const PolyMesh tet = reference_tetrahedron();
  for (int deg = 0; deg <= 20; deg += (deg < 8 ? 1 : 4)) {
    const auto rc = polyhedron_rule(cube.oriented_faces(0), deg);
    const auto rt = polyhedron_rule(tet.oriented_faces(0), deg);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b)
        for (int c = 0; a + b + c <= deg; ++c) {
          const double ec = box_moment({0, 0, 0}, {1, 1, 1}, a, b, c);
          const double et = simplex_moment(a, b, c);
          EXPECT_NEAR(integrate3(rc, a, b, c), ec, 1e-11 * ec);
          EXPECT_NEAR(integrate3(rt, a, b, c), et, 1e-11 * et);
        }
  }
}

TEST(PolyhedronRule, CollapsingOctahedronVolume) {
  for (int level = 0; level <= 4; ++level) {
    const PolyMesh m = build_collapsing_mesh(level);
    const auto r = polyhedron_rule(m.oriented_faces(0), 0);
    // Bipyramid over the unit-diagonal square in x = 0.5 (area 1/2),
    // apex separation 2 * offset.
    const double sep = 2.0 * collapse_apex_offset(level);
    EXPECT_NEAR(r.measure(), 0.5 * sep / 3.0, 1e-14) << "level " << level;
  }
}

TEST(PolyhedronRule, TranslationInvariantMoments) {
  const PolyMesh a = l_prism_cell();
  std::vector<Vec3> moved = a.vertices();
  const Vec3 shift(3.25, -1.5, 7.0);
  for (auto& x : moved) x += shift;
  std::vector<std::vector<int>> faces;
  for (const auto& f : a.faces()) faces.push_back(f.vertices);
  const PolyMesh b = PolyMesh::from_signed(moved, faces, a.cells());
  const auto ra = polyhedron_rule(a.oriented_faces(0), 6);
  const auto rb = polyhedron_rule(b.oriented_faces(0), 6);
  const Vec3 ca = a.cell_geometry(0).barycenter, cb = b.cell_geometry(0).barycenter;
  EXPECT_LE((cb - ca - shift).norm(), 1e-12);
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j)
      for (int k = 0; i + j + k <= 3; ++k) {
        auto moment = [&](const VolumeRule<3>& r, const Vec3& c) {
          double s = 0.0;
          for (std::size_t q = 0; q < r.size(); ++q) {
            const Vec3 d = r.points[q] - c;
            s += r.weights[q] * std::pow(d[0], i) * std::pow(d[1], j) * std::pow(d[2], k);
          }
          return s;
        };
        EXPECT_NEAR(moment(ra, ca), moment(rb, cb), 1e-12);
      }
}

TEST(PolyhedronRule, NonconvexWeightsSumToVolume) {
  const PolyMesh m = l_prism_cell();
  const auto r = polyhedron_rule(m.oriented_faces(0), 3);
  EXPECT_NEAR(r.measure(), 0.75, 1e-14);
  EXPECT_NEAR(m.cell_geometry(0).volume, 0.75, 1e-14);
}

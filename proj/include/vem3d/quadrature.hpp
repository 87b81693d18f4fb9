// 1D Gauss / Gauss-Lobatto rules and signed fan rules on polygons and
// polyhedra. Polygon and polyhedron rules are built from signed simplices,
// so they stay exact on nonconvex domains; individual weights may then be
// negative but they always sum to the measure.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "vem3d/errors.hpp"
#include "vem3d/polybasis.hpp"

namespace vem3d {

struct QuadRule1D {
  enum class Kind { gauss, gauss_lobatto };
  std::vector<double> nodes;
  std::vector<double> weights;
  Kind kind = Kind::gauss;
};

template <int Dim>
struct VolumeRule {
  std::vector<Point<Dim>> points;
  std::vector<double> weights;
  int declared_degree = 0;

  double measure() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
  std::size_t size() const { return weights.size(); }
};

namespace detail {

// Legendre P_n and its derivative at x.
inline std::pair<double, double> legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1), valid off the endpoints.
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

inline QuadRule1D compute_gauss(int n) {
  QuadRule1D rule;
  rule.kind = QuadRule1D::Kind::gauss;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [p, dp] = legendre(n, x);
    (void)p;
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

// Interior nodes are the roots of P_{n-1}'; Newton on P_{n-1}' using
// (1 - x^2) P'' = 2x P' - m(m+1) P.
inline QuadRule1D compute_gauss_lobatto(int n) {
  QuadRule1D rule;
  rule.kind = QuadRule1D::Kind::gauss_lobatto;
  const int m = n - 1;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  rule.nodes[0] = -1.0;
  rule.nodes[n - 1] = 1.0;
  for (int i = 1; i < n - 1; ++i) {
    double x = -std::cos(std::numbers::pi * i / m);
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(m, x);
      const double d2p = (2.0 * x * dp - m * (m + 1) * p) / (1.0 - x * x);
      const double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) < 1e-16 || std::abs(dp) < 1e-14) break;
    }
    rule.nodes[i] = x;
  }
  for (int i = 0; i < n; ++i) {
    const auto [p, dp] = legendre(m, rule.nodes[i]);
    (void)dp;
    rule.weights[i] = 2.0 / (m * (m + 1) * p * p);
  }
  return rule;
}

template <typename Fn>
const QuadRule1D& cached_rule(std::map<int, QuadRule1D>& cache, std::mutex& guard, int n, Fn make) {
  std::lock_guard<std::mutex> lock(guard);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  return cache.emplace(n, make(n)).first->second;
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1], exact to degree 2n-1.
inline const QuadRule1D& gauss_1d(int n) {
  if (n < 1) throw InvalidArgument("gauss_1d: rule size must be >= 1");
  static std::mutex guard;
  static std::map<int, QuadRule1D> cache;
  return detail::cached_rule(cache, guard, n, detail::compute_gauss);
}

/// n-point Gauss-Lobatto rule on [-1, 1] (endpoints included), exact to
/// degree 2n-3. A degree-p edge uses n = p+1, i.e. p-1 interior nodes.
inline const QuadRule1D& gauss_lobatto_1d(int n) {
  if (n < 2) throw InvalidArgument("gauss_lobatto_1d: rule size must be >= 2");
  static std::mutex guard;
  static std::map<int, QuadRule1D> cache;
  return detail::cached_rule(cache, guard, n, detail::compute_gauss_lobatto);
}

namespace detail {

// Duffy-collapsed Gauss rule on the reference triangle (0,0),(1,0),(0,1).
inline const VolumeRule<2>& reference_triangle(int degree) {
  static std::mutex guard;
  static std::map<int, VolumeRule<2>> cache;
  std::lock_guard<std::mutex> lock(guard);
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;
  const int n = (degree + 3) / 2;  // 2n-1 >= degree+1
  const auto& g = compute_gauss(n);
  VolumeRule<2> rule;
  rule.declared_degree = degree;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (g.nodes[i] + 1.0), wu = 0.5 * g.weights[i];
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (g.nodes[j] + 1.0), wv = 0.5 * g.weights[j];
      rule.points.emplace_back(u, v * (1.0 - u));
      rule.weights.push_back(wu * wv * (1.0 - u));
    }
  }
  return cache.emplace(degree, std::move(rule)).first->second;
}

// Duffy-collapsed Gauss rule on the reference tetrahedron.
inline const VolumeRule<3>& reference_tetrahedron(int degree) {
  static std::mutex guard;
  static std::map<int, VolumeRule<3>> cache;
  std::lock_guard<std::mutex> lock(guard);
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;
  const int n = (degree + 4) / 2;  // 2n-1 >= degree+2
  const auto g = compute_gauss(n);
  VolumeRule<3> rule;
  rule.declared_degree = degree;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (g.nodes[i] + 1.0), wu = 0.5 * g.weights[i];
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (g.nodes[j] + 1.0), wv = 0.5 * g.weights[j];
      for (int k = 0; k < n; ++k) {
        const double w = 0.5 * (g.nodes[k] + 1.0), ww = 0.5 * g.weights[k];
        rule.points.emplace_back(u, v * (1.0 - u), w * (1.0 - u) * (1.0 - v));
        rule.weights.push_back(wu * wv * ww * (1.0 - u) * (1.0 - u) * (1.0 - v));
      }
    }
  }
  return cache.emplace(degree, std::move(rule)).first->second;
}

}  // namespace detail

/// Signed rule on triangle (a, b, c); weights carry the orientation sign.
inline void append_triangle(VolumeRule<2>& rule, const Vec2& a, const Vec2& b, const Vec2& c) {
  const auto& ref = detail::reference_triangle(rule.declared_degree);
  Eigen::Matrix2d J;
  J.col(0) = b - a;
  J.col(1) = c - a;
  const double det = J.determinant();
  for (std::size_t q = 0; q < ref.size(); ++q) {
    rule.points.push_back(a + J * ref.points[q]);
    rule.weights.push_back(ref.weights[q] * det);
  }
}

inline void append_tetrahedron(VolumeRule<3>& rule, const Vec3& a, const Vec3& b, const Vec3& c,
                               const Vec3& d) {
  const auto& ref = detail::reference_tetrahedron(rule.declared_degree);
  Eigen::Matrix3d J;
  J.col(0) = b - a;
  J.col(1) = c - a;
  J.col(2) = d - a;
  const double det = J.determinant();
  for (std::size_t q = 0; q < ref.size(); ++q) {
    rule.points.push_back(a + J * ref.points[q]);
    rule.weights.push_back(ref.weights[q] * det);
  }
}

/// Rule on a simple planar polygon given by its vertex cycle (counter-
/// clockwise for a positive area), exact for polynomials <= degree.
inline VolumeRule<2> polygon_rule(std::span<const Vec2> vertices, int degree) {
  if (vertices.size() < 3) throw InvalidGeometry("polygon_rule: fewer than 3 vertices");
  VolumeRule<2> rule;
  rule.declared_degree = degree;
  Vec2 apex = Vec2::Zero();
  double diam = 0.0;
  for (const auto& v : vertices) apex += v;
  apex /= static_cast<double>(vertices.size());
  for (const auto& v : vertices)
    for (const auto& w : vertices) diam = std::max(diam, (v - w).norm());
  const std::size_t n = vertices.size();
  for (std::size_t k = 0; k < n; ++k) append_triangle(rule, apex, vertices[k], vertices[(k + 1) % n]);
  const double area = rule.measure();
  if (!(std::abs(area) > 1e-14 * diam * diam))
    throw DegenerateDomain("polygon_rule: zero-area polygon");
  return rule;
}

/// Rule on a polyhedron described by its boundary faces; each face is a
/// vertex cycle oriented counter-clockwise seen from outside.
inline VolumeRule<3> polyhedron_rule(const std::vector<std::vector<Vec3>>& oriented_faces, int degree) {
  if (oriented_faces.size() < 4) throw InvalidMesh("polyhedron_rule: fewer than 4 faces");
  Vec3 apex = Vec3::Zero();
  std::size_t count = 0;
  double diam = 0.0;
  Vec3 closure = Vec3::Zero();
  for (const auto& f : oriented_faces) {
    for (const auto& v : f) {
      apex += v;
      ++count;
    }
    for (std::size_t k = 0; k < f.size(); ++k) closure += 0.5 * f[k].cross(f[(k + 1) % f.size()]);
  }
  apex /= static_cast<double>(count);
  for (const auto& f : oriented_faces)
    for (const auto& v : f) diam = std::max(diam, 2.0 * (v - apex).norm());
  if (closure.norm() > 1e-10 * diam * diam)
    throw InvalidMesh("polyhedron_rule: boundary faces do not form a closed surface");

  VolumeRule<3> rule;
  rule.declared_degree = degree;
  for (const auto& f : oriented_faces) {
    Vec3 fapex = Vec3::Zero();
    for (const auto& v : f) fapex += v;
    fapex /= static_cast<double>(f.size());
    for (std::size_t k = 0; k < f.size(); ++k)
      append_tetrahedron(rule, apex, fapex, f[k], f[(k + 1) % f.size()]);
  }
  const double vol = rule.measure();
  if (!(std::abs(vol) > 1e-14 * diam * diam * diam))
    throw DegenerateDomain("polyhedron_rule: zero-volume polyhedron");
  return rule;
}

}  // namespace vem3d

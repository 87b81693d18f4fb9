// Scaled monomial bases on polygons (Dim = 2) and polyhedra (Dim = 3).
//
// Monomials are ordered by total degree; inside a degree block the exponent
// tuples run in descending lexicographic order, so that
//   3D: (0,0,0) (1,0,0) (0,1,0) (0,0,1) (2,0,0) (1,1,0) (1,0,1) (0,2,0) ...
//   2D: (0,0) (1,0) (0,1) (2,0) (1,1) (0,2) ...
// With this ordering the first dim_poly(k) members always span the
// polynomials of degree <= k.
//
// Linear indices in the public API are 1-based, as in the usual VEM
// notation; the *_table helpers are 0-based.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "vem3d/errors.hpp"

namespace vem3d {

template <int Dim>
using Point = Eigen::Matrix<double, Dim, 1>;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

template <int Dim>
using Exponents = std::array<int, Dim>;

/// Dimension of the degree-p polynomial space in `ambient_dim` variables.
/// Returns 0 for p < 0 (the empty space P_{-1}).
constexpr int dim_poly(int p, int ambient_dim) {
  if (p < 0) return 0;
  if (ambient_dim == 2) return (p + 1) * (p + 2) / 2;
  return (p + 1) * (p + 2) * (p + 3) / 6;
}

template <int Dim>
struct MultiIndex {
  Exponents<Dim> exponents{};
  int linear_index = 1;

  int degree() const {
    int d = 0;
    for (int e : exponents) d += e;
    return d;
  }
};

/// 1-based position of an exponent tuple in the graded ordering.
template <int Dim>
int linear_index(const Exponents<Dim>& e) {
  int d = 0;
  for (int v : e) d += v;
  const int offset = dim_poly(d - 1, Dim);
  if constexpr (Dim == 2) {
    return offset + (d - e[0]) + 1;
  } else {
    const int r = d - e[0];
    return offset + r * (r + 1) / 2 + (r - e[1]) + 1;
  }
}

/// Exponent tuples of all monomials of degree <= p, 0-based order.
template <int Dim>
const std::vector<Exponents<Dim>>& exponent_table(int p) {
  static std::mutex guard;
  static std::map<int, std::vector<Exponents<Dim>>> cache;
  std::lock_guard<std::mutex> lock(guard);
  auto it = cache.find(p);
  if (it != cache.end()) return it->second;
  std::vector<Exponents<Dim>> table;
  table.reserve(dim_poly(p, Dim));
  for (int d = 0; d <= p; ++d) {
    if constexpr (Dim == 2) {
      for (int a = d; a >= 0; --a) table.push_back({a, d - a});
    } else {
      for (int a = d; a >= 0; --a)
        for (int b = d - a; b >= 0; --b) table.push_back({a, b, d - a - b});
    }
  }
  return cache.emplace(p, std::move(table)).first->second;
}

/// Inverse of linear_index. Total on linear_index >= 1.
template <int Dim>
MultiIndex<Dim> multi_index(int linear_index) {
  if (linear_index < 1) throw InvalidArgument("multi_index: linear index must be >= 1");
  int d = 0;
  while (dim_poly(d, Dim) < linear_index) ++d;
  const auto& table = exponent_table<Dim>(d);
  return MultiIndex<Dim>{table[linear_index - 1], linear_index};
}

/// Runtime-dimension convenience wrapper returning the exponent tuple.
inline std::vector<int> multi_index(int linear_index, int ambient_dim) {
  if (ambient_dim == 2) {
    auto m = multi_index<2>(linear_index);
    return {m.exponents[0], m.exponents[1]};
  }
  if (ambient_dim == 3) {
    auto m = multi_index<3>(linear_index);
    return {m.exponents[0], m.exponents[1], m.exponents[2]};
  }
  throw InvalidArgument("multi_index: ambient dimension must be 2 or 3");
}

/// { ((x - center) / scale)^alpha : |alpha| <= degree }.
template <int Dim>
class ScaledMonomialBasis {
 public:
  ScaledMonomialBasis(int degree, const Point<Dim>& center, double scale)
      : degree_(degree), center_(center), scale_(scale) {
    if (degree < 0 || degree > kMaxDegree)
      throw InvalidArgument("ScaledMonomialBasis: degree out of range");
    if (!(scale > 0.0) || !std::isfinite(scale))
      throw InvalidGeometry("ScaledMonomialBasis: scale must be positive, got " +
                            std::to_string(scale));
    table_ = &exponent_table<Dim>(degree_);
  }

  int degree() const { return degree_; }
  int count() const { return dim_poly(degree_, Dim); }
  const Point<Dim>& center() const { return center_; }
  double scale() const { return scale_; }
  const std::vector<Exponents<Dim>>& exponents() const { return *table_; }

  VectorXd eval(const Point<Dim>& x) const {
    const auto pw = powers(x);
    const auto& table = exponents();
    VectorXd v(table.size());
    for (std::size_t a = 0; a < table.size(); ++a) {
      double val = 1.0;
      for (int d = 0; d < Dim; ++d) val *= pw[d][table[a][d]];
      v[a] = val;
    }
    return v;
  }

  /// Row alpha holds grad m_alpha at x.
  MatrixXd gradient(const Point<Dim>& x) const {
    const auto pw = powers(x);
    const auto& table = exponents();
    MatrixXd g(table.size(), Dim);
    for (std::size_t a = 0; a < table.size(); ++a) {
      for (int d = 0; d < Dim; ++d) {
        const int e = table[a][d];
        if (e == 0) {
          g(a, d) = 0.0;
          continue;
        }
        double val = e * pw[d][e - 1] / scale_;
        for (int o = 0; o < Dim; ++o)
          if (o != d) val *= pw[o][table[a][o]];
        g(a, d) = val;
      }
    }
    return g;
  }

 private:
  static constexpr int kMaxDegree = 31;

  std::array<std::array<double, kMaxDegree + 1>, Dim> powers(const Point<Dim>& x) const {
    std::array<std::array<double, kMaxDegree + 1>, Dim> pw;
    for (int d = 0; d < Dim; ++d) {
      const double t = (x[d] - center_[d]) / scale_;
      pw[d][0] = 1.0;
      for (int k = 1; k <= degree_; ++k) pw[d][k] = pw[d][k - 1] * t;
    }
    return pw;
  }

  int degree_;
  Point<Dim> center_;
  double scale_;
  const std::vector<Exponents<Dim>>* table_ = nullptr;
};

/// Exact expansion of -Laplacian(m_alpha) in the monomials of degree <= p-2:
/// row alpha holds the coefficients. Size count(p) x count(p-2).
template <int Dim>
MatrixXd laplacian_expansion(const ScaledMonomialBasis<Dim>& basis) {
  const int p = basis.degree();
  const auto& table = basis.exponents();
  const int low = dim_poly(p - 2, Dim);
  MatrixXd lap = MatrixXd::Zero(table.size(), low);
  const double inv_h2 = 1.0 / (basis.scale() * basis.scale());
  for (std::size_t a = 0; a < table.size(); ++a) {
    for (int d = 0; d < Dim; ++d) {
      const int e = table[a][d];
      if (e < 2) continue;
      Exponents<Dim> shifted = table[a];
      shifted[d] -= 2;
      lap(a, linear_index<Dim>(shifted) - 1) -= e * (e - 1) * inv_h2;
    }
  }
  return lap;
}

/// L(alpha, gamma) = (-Laplacian m_alpha, m_gamma) computed from the monomial
/// mass matrix H of the same domain: only shifted indices of H are needed.
template <int Dim>
MatrixXd laplacian_matrix(const ScaledMonomialBasis<Dim>& basis, const MatrixXd& mass) {
  const int n = basis.count();
  if (mass.rows() < n)
    throw InvalidArgument("laplacian_matrix: mass matrix smaller than the basis");
  const auto& table = basis.exponents();
  const double inv_h2 = 1.0 / (basis.scale() * basis.scale());
  MatrixXd L = MatrixXd::Zero(n, mass.cols());
  for (int a = 0; a < n; ++a) {
    for (int d = 0; d < Dim; ++d) {
      const int e = table[a][d];
      if (e < 2) continue;
      Exponents<Dim> shifted = table[a];
      shifted[d] -= 2;
      L.row(a) -= (e * (e - 1) * inv_h2) * mass.row(linear_index<Dim>(shifted) - 1);
    }
  }
  return L;
}

namespace detail {

// Plain Cholesky with an explicit relative pivot floor.
inline MatrixXd cholesky_factor(const MatrixXd& mass, double relative_pivot_floor) {
  const int n = static_cast<int>(mass.rows());
  const double max_diag = mass.diagonal().cwiseAbs().maxCoeff();
  MatrixXd L = MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double pivot = mass(j, j);
    for (int k = 0; k < j; ++k) pivot -= L(j, k) * L(j, k);
    if (!(pivot > relative_pivot_floor * max_diag))
      throw DegenerateDomain("gram_schmidt: mass matrix not positive definite at row " +
                             std::to_string(j + 1) + " (pivot " + std::to_string(pivot) + ")");
    L(j, j) = std::sqrt(pivot);
    for (int i = j + 1; i < n; ++i) {
      double s = mass(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

}  // namespace detail

inline constexpr double kSpdPivotFloor = 1e-14;

/// Lower-triangular GS with GS * mass * GS^T = I. Row k combines the first k
/// members only, so degree splittings survive. Two passes: the second one
/// re-orthonormalizes against the recomputed mass.
inline MatrixXd gram_schmidt(const MatrixXd& mass) {
  if (mass.rows() != mass.cols() || mass.rows() == 0)
    throw InvalidArgument("gram_schmidt: mass matrix must be square and nonempty");
  const int n = static_cast<int>(mass.rows());
  const MatrixXd sym = 0.5 * (mass + mass.transpose());
  const MatrixXd L1 = detail::cholesky_factor(sym, kSpdPivotFloor);
  const MatrixXd gs1 = L1.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(n, n));
  MatrixXd second = gs1 * sym * gs1.transpose();
  second = 0.5 * (second + second.transpose());
  const MatrixXd L2 = detail::cholesky_factor(second, kSpdPivotFloor);
  const MatrixXd gs2 = L2.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(n, n));
  MatrixXd gs = gs2 * gs1;
  gs.triangularView<Eigen::StrictlyUpper>().setZero();
  return gs;
}

}  // namespace vem3d

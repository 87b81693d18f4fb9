// Relative error norms, convergence rates and stiffness condition estimates.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "vem3d/assembly.hpp"
#include "vem3d/elemvem.hpp"
#include "vem3d/errors.hpp"

namespace vem3d {

struct ExactSolution {
  std::string name;
  ScalarField u;
  VectorField grad;
  ScalarField f;  // -Laplacian of u
};

/// sin(pi x) sin(pi y) sin(pi z), forcing 3 pi^2 u.
inline ExactSolution solution_u1() {
  constexpr double pi = std::numbers::pi;
  ExactSolution s;
  s.name = "u1";
  s.u = [](const Vec3& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]) * std::sin(pi * x[2]); };
  s.grad = [](const Vec3& x) {
    const double sx = std::sin(pi * x[0]), sy = std::sin(pi * x[1]), sz = std::sin(pi * x[2]);
    const double cx = std::cos(pi * x[0]), cy = std::cos(pi * x[1]), cz = std::cos(pi * x[2]);
    return Vec3(pi * cx * sy * sz, pi * sx * cy * sz, pi * sx * sy * cz);
  };
  s.f = [u = s.u](const Vec3& x) { return 3.0 * pi * pi * u(x); };
  return s;
}

/// 1 + x + y + z, zero forcing.
inline ExactSolution solution_u2() {
  ExactSolution s;
  s.name = "u2";
  s.u = [](const Vec3& x) { return 1.0 + x[0] + x[1] + x[2]; };
  s.grad = [](const Vec3&) { return Vec3(1.0, 1.0, 1.0); };
  s.f = [](const Vec3&) { return 0.0; };
  return s;
}

inline ExactSolution exact_solution(const std::string& name) {
  if (name == "u1") return solution_u1();
  if (name == "u2") return solution_u2();
  throw InvalidArgument("unknown solution '" + name + "' (expected u1 or u2)");
}

struct ErrorReport {
  double h1_relative = 0.0;
  double l2_relative = 0.0;
  double h1_norm = 0.0;  // |u|_1
  double l2_norm = 0.0;  // ||u||_0
  std::vector<double> cell_h1_squared;
  std::vector<double> cell_l2_squared;
  double h = 0.0;
  int p = 1;
  BasisChoice choice = BasisChoice::standard;
};

/// |u - Pi-nabla u_h|_{1,h} / |u|_1 and ||u - Pi0 u_h||_0 / ||u||_0 with a
/// rule exact to degree 2p+2 on every cell.
inline ErrorReport compute_errors(const Discretization& d, const VectorXd& uh, const ScalarField& u,
                                  const VectorField& grad_u, int threads = 0) {
  const PolyMesh& mesh = *d.mesh;
  if (uh.size() != d.dofs.count)
    throw InvalidArgument("compute_errors: solution has " + std::to_string(uh.size()) + " entries, expected " +
                          std::to_string(d.dofs.count));
  const int nc = mesh.num_cells();
  ErrorReport rep;
  rep.p = d.p;
  rep.choice = d.choice;
  rep.h = mesh.mesh_size();
  rep.cell_h1_squared.assign(nc, 0.0);
  rep.cell_l2_squared.assign(nc, 0.0);
  std::vector<double> h1u(nc, 0.0), l2u(nc, 0.0);
  parallel_for(
      nc,
      [&](int c) {
        const auto& ops = d.elements[c];
        const std::vector<int> ids = d.global_dofs(c);
        VectorXd local(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) local[i] = uh[ids[i]];
        const VectorXd cn = ops.pi_nabla * local;
        const VectorXd c0 = ops.pi_zero * local;
        const VolumeRule<3> rule = polyhedron_rule(mesh.oriented_faces(c), 2 * d.p + 2);
        double eh = 0.0, el = 0.0, nh = 0.0, nl = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const Vec3& x = rule.points[q];
          const double w = rule.weights[q];
          const double ux = u(x);
          const Vec3 gx = grad_u(x);
          const Vec3 gh = ops.basis_gradients(x).transpose() * cn;
          const double vh = ops.basis_values(x).dot(c0);
          eh += w * (gx - gh).squaredNorm();
          el += w * (ux - vh) * (ux - vh);
          nh += w * gx.squaredNorm();
          nl += w * ux * ux;
        }
        rep.cell_h1_squared[c] = eh;
        rep.cell_l2_squared[c] = el;
        h1u[c] = nh;
        l2u[c] = nl;
      },
      threads);
  double eh = 0.0, el = 0.0, nh = 0.0, nl = 0.0;
  for (int c = 0; c < nc; ++c) {
    eh += rep.cell_h1_squared[c];
    el += rep.cell_l2_squared[c];
    nh += h1u[c];
    nl += l2u[c];
  }
  rep.h1_norm = std::sqrt(std::max(nh, 0.0));
  rep.l2_norm = std::sqrt(std::max(nl, 0.0));
  rep.h1_relative = std::sqrt(std::max(eh, 0.0)) / rep.h1_norm;
  rep.l2_relative = std::sqrt(std::max(el, 0.0)) / rep.l2_norm;
  return rep;
}

struct Rate {
  double value = 0.0;
  bool exact = false;  // one of the two errors is zero
};

/// Observed orders log(e_i / e_{i+1}) / log(h_i / h_{i+1}).
inline std::vector<Rate> convergence_rates(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size()) throw InvalidArgument("convergence_rates: size mismatch");
  if (h.size() < 2) throw InvalidArgument("convergence_rates: need at least two reports");
  std::vector<Rate> out;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    Rate r;
    if (err[i] == 0.0 || err[i + 1] == 0.0) {
      r.exact = true;
    } else {
      if (h[i] == h[i + 1]) throw InvalidArgument("convergence_rates: repeated mesh size");
      r.value = std::log(err[i] / err[i + 1]) / std::log(h[i] / h[i + 1]);
    }
    out.push_back(r);
  }
  return out;
}

struct ConditionEstimate {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double kappa = 1.0;
  int iterations_max = 0;
  int iterations_min = 0;
  bool approximate = false;  // Lanczos Ritz values instead of power/inverse iteration
};

namespace detail {

inline VectorXd start_vector(int n) {
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + 0.7 * i);
  return v.normalized();
}

// Rayleigh-quotient iteration driver: apply(v) is A v or A^-1 v.
template <typename Apply>
std::pair<double, int> power_iteration(int n, Apply apply, double tol, int max_iter) {
  VectorXd v = start_vector(n);
  double lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const VectorXd w = apply(v);
    const double next = v.dot(w);
    const double nw = w.norm();
    if (!(nw > 0.0)) return {0.0, it};
    v = w / nw;
    if (it > 1 && std::abs(next - lambda) <= tol * std::abs(next)) return {next, it};
    lambda = next;
  }
  return {lambda, max_iter};
}

inline std::pair<double, double> lanczos_extremes(const SparseMatrix& A, int steps) {
  const int n = static_cast<int>(A.rows());
  const int m = std::min(n, steps);
  MatrixXd V(n, m);
  VectorXd alpha(m), beta(m);
  V.col(0) = start_vector(n);
  int k = 0;
  for (; k < m; ++k) {
    VectorXd w = A * V.col(k);
    alpha[k] = V.col(k).dot(w);
    w -= V.leftCols(k + 1) * (V.leftCols(k + 1).transpose() * w);
    w -= V.leftCols(k + 1) * (V.leftCols(k + 1).transpose() * w);
    beta[k] = w.norm();
    if (k + 1 == m || beta[k] <= 1e-14 * std::abs(alpha[k])) {
      ++k;
      break;
    }
    V.col(k + 1) = w / beta[k];
  }
  MatrixXd T = MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace detail

/// kappa(A) = lambda_max / lambda_min of a symmetric matrix: power iteration
/// for lambda_max, inverse iteration through a sparse LDL^T factorization
/// for lambda_min. Without a positive definite factorization the estimate
/// falls back to Lanczos Ritz values and is flagged approximate.
inline ConditionEstimate estimate_condition(const SparseMatrix& A, double tol = 1e-6, int max_iter = 20000) {
  const int n = static_cast<int>(A.rows());
  if (n == 0 || A.cols() != n) throw InvalidArgument("estimate_condition: need a nonempty square matrix");
  ConditionEstimate est;
  const auto [lmax, itmax] = detail::power_iteration(n, [&](const VectorXd& v) { return VectorXd(A * v); }, tol,
                                                     max_iter);
  est.lambda_max = lmax;
  est.iterations_max = itmax;

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
  bool spd = ldlt.info() == Eigen::Success;
  if (spd) {
    const VectorXd dvec = ldlt.vectorD();
    spd = dvec.minCoeff() > 1e-14 * dvec.cwiseAbs().maxCoeff();
  }
  if (spd) {
    const auto [mu, itmin] =
        detail::power_iteration(n, [&](const VectorXd& v) { return VectorXd(ldlt.solve(v)); }, tol, max_iter);
    est.lambda_min = 1.0 / mu;
    est.iterations_min = itmin;
  } else {
    const auto [lo, hi] = detail::lanczos_extremes(A, 200);
    est.lambda_min = lo;
    est.lambda_max = std::max(est.lambda_max, hi);
    est.approximate = true;
  }
  est.kappa = est.lambda_min > 0.0 ? std::max(1.0, est.lambda_max / est.lambda_min)
                                   : std::numeric_limits<double>::infinity();
  return est;
}

}  // namespace vem3d

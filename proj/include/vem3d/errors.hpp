// Error types shared by every vem3d module.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vem3d {

/// Base class of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable reason, used in experiment report rows.
  virtual const char* kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

class InvalidGeometry : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_geometry"; }
};

/// Zero-measure or numerically collapsed domain (mass matrix or volume).
class DegenerateDomain : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate_domain"; }
};

/// Element-level breakdown; carries the cell id and the offending pivot.
class DegenerateElement : public Error {
 public:
  DegenerateElement(const std::string& what, int cell, double pivot)
      : Error(what), cell_(cell), pivot_(pivot) {}
  const char* kind() const noexcept override { return "degenerate_element"; }
  int cell() const noexcept { return cell_; }
  double pivot() const noexcept { return pivot_; }

 private:
  int cell_;
  double pivot_;
};

class InvalidMesh : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_mesh"; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  const char* kind() const noexcept override { return "parse_error"; }
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double pivot = 0.0)
      : Error(what), pivot_(pivot) {}
  const char* kind() const noexcept override { return "solver_error"; }
  double pivot() const noexcept { return pivot_; }

 private:
  double pivot_;
};

/// Conjugate gradients did not converge; carries the residual norms.
class IterativeFailure : public SolverError {
 public:
  IterativeFailure(const std::string& what, std::vector<double> residuals)
      : SolverError(what), residuals_(std::move(residuals)) {}
  const char* kind() const noexcept override { return "iterative_failure"; }
  const std::vector<double>& residual_history() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

}  // namespace vem3d

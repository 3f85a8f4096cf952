#pragma once

#include <stdexcept>
#include <string>

namespace savmhd {

/// Saddle operator could not be factorized (structurally or numerically singular).
class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solve finished above the residual contract.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double achieved_residual)
      : std::runtime_error(what), achieved_residual_(achieved_residual) {}
  double achieved_residual() const { return achieved_residual_; }

 private:
  double achieved_residual_;
};

/// The scalar SAV equation has a non-positive leading coefficient. Cannot
/// happen for exact arithmetic; signals corrupted operators.
class SolvabilityError : public std::runtime_error {
 public:
  SolvabilityError(const std::string& what, double denominator)
      : std::runtime_error(what), denominator_(denominator) {}
  double denominator() const { return denominator_; }

 private:
  double denominator_;
};

class UnsupportedProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace savmhd

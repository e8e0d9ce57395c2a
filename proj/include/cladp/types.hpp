#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cladp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Raised when an argument breaks an operation's precondition (dimension
/// mismatch, non-finite input, non-PD gain, ...).
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what)
      : std::invalid_argument(what) {}
};

inline void Require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

inline bool AllFinite(const MatrixXd& m) { return m.allFinite(); }

/// Largest singular value.
double SpectralNorm(const MatrixXd& m);

/// Smallest / largest eigenvalue of the symmetric part of `m`.
double MinEigenvalue(const MatrixXd& m);
double MaxEigenvalue(const MatrixXd& m);

bool IsSymmetric(const MatrixXd& m, double tol = 1e-12);
bool IsPositiveDefinite(const MatrixXd& m);

}  // namespace cladp

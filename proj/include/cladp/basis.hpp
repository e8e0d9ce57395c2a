#pragma once

#include <string>
#include <vector>

#include "cladp/types.hpp"

namespace cladp {

class PlantModel;
class CostSpec;

/// Monomial feature vector sigma(x) with its Jacobian.
///
/// Features are all monomials of the requested total degrees, ordered
/// lexicographically by exponent tuple (descending in x1, then x2, ...), so
/// for n = 2 and degree 2 the order is x1^2, x1 x2, x2^2.
class ValueBasis {
 public:
  ValueBasis(int n, std::vector<std::vector<int>> exponents,
             std::string description);

  int n() const { return n_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  const std::vector<std::vector<int>>& exponents() const { return exponents_; }
  const std::string& description() const { return description_; }

  /// sigma(x), length L.
  VectorXd Sigma(const VectorXd& x) const;
  /// sigma'(x), L x n.
  MatrixXd SigmaGrad(const VectorXd& x) const;

 private:
  int n_;
  std::vector<std::vector<int>> exponents_;
  std::string description_;
};

/// All monomials in n variables whose total degree is in `degrees`.
/// Degrees below 2 are rejected: they would break sigma'(0) = 0.
ValueBasis MakePolynomialBasis(int n, const std::vector<int>& degrees);

/// G_sigma = sigma' g R^-1 g' sigma'^T, L x L.
MatrixXd GSigma(const ValueBasis& basis, const PlantModel& model,
                const CostSpec& cost, const VectorXd& x);

}  // namespace cladp

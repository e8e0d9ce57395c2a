#include "cladp/basis.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <utility>

#include "cladp/plant.hpp"

namespace cladp {
namespace {

double IntPow(double base, int exp) {
  double r = 1.0;
  for (int k = 0; k < exp; ++k) r *= base;
  return r;
}

// Exponent tuples of total degree `degree` in n variables, descending
// lexicographic order.
void EnumerateMonomials(int n, int degree, std::vector<std::vector<int>>* out) {
  std::vector<int> current(n, 0);
  std::function<void(int, int)> recurse = [&](int var, int remaining) {
    if (var == n - 1) {
      current[var] = remaining;
      out->push_back(current);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      current[var] = e;
      recurse(var + 1, remaining - e);
    }
  };
  recurse(0, degree);
}

}  // namespace

ValueBasis::ValueBasis(int n, std::vector<std::vector<int>> exponents,
                       std::string description)
    : n_(n), exponents_(std::move(exponents)), description_(std::move(description)) {
  Require(n_ > 0, "basis dimension must be positive");
  Require(!exponents_.empty(), "basis must have at least one feature");
  for (const auto& e : exponents_) {
    Require(static_cast<int>(e.size()) == n_, "exponent tuple has wrong length");
    int total = 0;
    for (int k : e) {
      Require(k >= 0, "exponents must be nonnegative");
      total += k;
    }
    Require(total >= 2, "monomials of degree < 2 violate sigma'(0) = 0");
  }
}

VectorXd ValueBasis::Sigma(const VectorXd& x) const {
  Require(x.size() == n_, "state has wrong dimension for basis");
  VectorXd s(size());
  for (int l = 0; l < size(); ++l) {
    double v = 1.0;
    for (int i = 0; i < n_; ++i) v *= IntPow(x(i), exponents_[l][i]);
    s(l) = v;
  }
  return s;
}

MatrixXd ValueBasis::SigmaGrad(const VectorXd& x) const {
  Require(x.size() == n_, "state has wrong dimension for basis");
  MatrixXd d = MatrixXd::Zero(size(), n_);
  for (int l = 0; l < size(); ++l) {
    const auto& e = exponents_[l];
    for (int j = 0; j < n_; ++j) {
      if (e[j] == 0) continue;
      double v = e[j] * IntPow(x(j), e[j] - 1);
      for (int i = 0; i < n_; ++i)
        if (i != j) v *= IntPow(x(i), e[i]);
      d(l, j) = v;
    }
  }
  return d;
}

ValueBasis MakePolynomialBasis(int n, const std::vector<int>& degrees) {
  Require(n > 0, "basis dimension must be positive");
  Require(!degrees.empty(), "degree set must be nonempty");
  std::set<int> unique(degrees.begin(), degrees.end());
  std::vector<std::vector<int>> exponents;
  std::ostringstream desc;
  desc << "monomials n=" << n << " degrees={";
  bool first = true;
  for (int d : unique) {
    Require(d >= 2, "polynomial basis degrees must be >= 2");
    EnumerateMonomials(n, d, &exponents);
    desc << (first ? "" : ",") << d;
    first = false;
  }
  desc << "}";
  return ValueBasis(n, std::move(exponents), desc.str());
}

MatrixXd GSigma(const ValueBasis& basis, const PlantModel& model,
                const CostSpec& cost, const VectorXd& x) {
  Require(basis.n() == model.n(), "basis and plant dimensions differ");
  const MatrixXd sg = basis.SigmaGrad(x) * model.Effectiveness(x);
  MatrixXd G = sg * cost.R_inverse() * sg.transpose();
  return 0.5 * (G + G.transpose());
}

}  // namespace cladp

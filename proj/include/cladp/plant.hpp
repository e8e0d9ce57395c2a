#pragma once

#include <functional>
#include <optional>
#include <string>

#include "cladp/types.hpp"

namespace cladp {

using RegressorFn = std::function<MatrixXd(const VectorXd&)>;
using EffectivenessFn = std::function<MatrixXd(const VectorXd&)>;

/// Jacobian of the drift and control effectiveness at the origin. Catalog
/// plants carry it so the Riccati oracle can be built without differentiating.
struct Linearization {
  MatrixXd A;
  MatrixXd B;
  /// Known stabilizing gain for A - B K; empty means "compute one".
  std::optional<MatrixXd> K0;
};

/// Control-affine plant xdot = Y(x) theta* + g(x) u.
class PlantModel {
 public:
  /// Rejects regressors with ||Y(0)|| > 1e-12 so that f(0) = 0.
  PlantModel(std::string name, int n, int m, int p, RegressorFn regressor,
             VectorXd theta_star, EffectivenessFn g,
             std::optional<Linearization> linearization = std::nullopt);

  const std::string& name() const { return name_; }
  int n() const { return n_; }
  int m() const { return m_; }
  int p() const { return p_; }
  const VectorXd& theta_star() const { return theta_star_; }
  const std::optional<Linearization>& linearization() const {
    return linearization_;
  }

  /// Y(x), n x p.
  MatrixXd Regressor(const VectorXd& x) const;
  /// g(x), n x m.
  MatrixXd Effectiveness(const VectorXd& x) const;

 private:
  std::string name_;
  int n_, m_, p_;
  RegressorFn regressor_;
  VectorXd theta_star_;
  EffectivenessFn g_;
  std::optional<Linearization> linearization_;
};

/// Quadratic running cost x'Qx + u'Ru.
class CostSpec {
 public:
  CostSpec(MatrixXd Q, MatrixXd R);

  const MatrixXd& Q() const { return Q_; }
  const MatrixXd& R() const { return R_; }
  const MatrixXd& R_inverse() const { return R_inv_; }
  /// Minimum eigenvalue of Q.
  double q_under() const { return q_under_; }

 private:
  MatrixXd Q_, R_, R_inv_;
  double q_under_;
};

VectorXd Drift(const PlantModel& model, const VectorXd& x);
VectorXd Dynamics(const PlantModel& model, const VectorXd& x,
                  const VectorXd& u);
double InstantaneousCost(const CostSpec& cost, const VectorXd& x,
                         const VectorXd& u);

// Model catalog.

/// xdot = A x + B u, with Y(x) = I_n (x) x' and theta* = row-major vec(A).
PlantModel MakeLinearPlant(const MatrixXd& A, const MatrixXd& B,
                           std::optional<MatrixXd> K0 = std::nullopt);

/// Two-state polynomial plant
///   xdot1 = t1 x1 + t2 x2 + t3 x1 x2^2
///   xdot2 = t4 x1 + t5 x1^2 x2 + u
/// With the default theta* = (-1, 1, 1, -0.5, -0.5), Q = I and R = 1 the
/// optimal value function is 0.5 x1^2 + x2^2.
PlantModel MakePolynomialPlant(std::optional<VectorXd> theta_star =
                                   std::nullopt);

}  // namespace cladp

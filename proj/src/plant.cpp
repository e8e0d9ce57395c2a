#include "cladp/plant.hpp"

#include <cmath>
#include <utility>

namespace cladp {

double SpectralNorm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double MinEigenvalue(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double MaxEigenvalue(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

bool IsSymmetric(const MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool IsPositiveDefinite(const MatrixXd& m) {
  return m.rows() == m.cols() && m.rows() > 0 && IsSymmetric(m) &&
         MinEigenvalue(m) > 0.0;
}

PlantModel::PlantModel(std::string name, int n, int m, int p,
                       RegressorFn regressor, VectorXd theta_star,
                       EffectivenessFn g,
                       std::optional<Linearization> linearization)
    : name_(std::move(name)),
      n_(n),
      m_(m),
      p_(p),
      regressor_(std::move(regressor)),
      theta_star_(std::move(theta_star)),
      g_(std::move(g)),
      linearization_(std::move(linearization)) {
  Require(n_ > 0 && m_ > 0 && p_ > 0, "plant dimensions must be positive");
  Require(theta_star_.size() == p_, "theta_star must have p entries");
  Require(theta_star_.allFinite(), "theta_star must be finite");
  const MatrixXd y0 = Regressor(VectorXd::Zero(n_));
  Require(y0.cwiseAbs().maxCoeff() <= 1e-12,
          "regressor must vanish at the origin (f(0) = 0)");
  (void)Effectiveness(VectorXd::Zero(n_));
  if (linearization_) {
    Require(linearization_->A.rows() == n_ && linearization_->A.cols() == n_,
            "linearization A must be n x n");
    Require(linearization_->B.rows() == n_ && linearization_->B.cols() == m_,
            "linearization B must be n x m");
  }
}

MatrixXd PlantModel::Regressor(const VectorXd& x) const {
  Require(x.size() == n_, "state has wrong dimension");
  MatrixXd y = regressor_(x);
  Require(y.rows() == n_ && y.cols() == p_, "regressor must be n x p");
  return y;
}

MatrixXd PlantModel::Effectiveness(const VectorXd& x) const {
  Require(x.size() == n_, "state has wrong dimension");
  MatrixXd g = g_(x);
  Require(g.rows() == n_ && g.cols() == m_, "g(x) must be n x m");
  return g;
}

CostSpec::CostSpec(MatrixXd Q, MatrixXd R) : Q_(std::move(Q)), R_(std::move(R)) {
  Require(IsPositiveDefinite(Q_), "Q must be symmetric positive definite");
  Require(IsPositiveDefinite(R_), "R must be symmetric positive definite");
  R_inv_ = R_.llt().solve(MatrixXd::Identity(R_.rows(), R_.cols()));
  q_under_ = MinEigenvalue(Q_);
}

VectorXd Drift(const PlantModel& model, const VectorXd& x) {
  Require(x.allFinite(), "state must be finite");
  return model.Regressor(x) * model.theta_star();
}

VectorXd Dynamics(const PlantModel& model, const VectorXd& x,
                  const VectorXd& u) {
  Require(u.size() == model.m(), "input has wrong dimension");
  Require(u.allFinite(), "input must be finite");
  return Drift(model, x) + model.Effectiveness(x) * u;
}

double InstantaneousCost(const CostSpec& cost, const VectorXd& x,
                         const VectorXd& u) {
  Require(x.size() == cost.Q().rows(), "state has wrong dimension for Q");
  Require(u.size() == cost.R().rows(), "input has wrong dimension for R");
  return x.dot(cost.Q() * x) + u.dot(cost.R() * u);
}

PlantModel MakeLinearPlant(const MatrixXd& A, const MatrixXd& B,
                           std::optional<MatrixXd> K0) {
  const int n = static_cast<int>(A.rows());
  Require(n > 0 && A.cols() == n, "A must be square");
  Require(B.rows() == n && B.cols() > 0, "B must be n x m");
  const int m = static_cast<int>(B.cols());
  VectorXd theta(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) theta(i * n + j) = A(i, j);
  auto regressor = [n](const VectorXd& x) {
    MatrixXd y = MatrixXd::Zero(n, n * n);
    for (int i = 0; i < n; ++i) y.block(i, i * n, 1, n) = x.transpose();
    return y;
  };
  auto g = [B](const VectorXd&) { return B; };
  if (K0) {
    Require(K0->rows() == m && K0->cols() == n, "K0 must be m x n");
  }
  return PlantModel(n == 1 ? "scalar_linear" : "linear", n, m, n * n,
                    regressor, theta, g, Linearization{A, B, std::move(K0)});
}

PlantModel MakePolynomialPlant(std::optional<VectorXd> theta_star) {
  VectorXd theta(5);
  theta << -1.0, 1.0, 1.0, -0.5, -0.5;
  if (theta_star) {
    Require(theta_star->size() == 5, "polynomial plant has 5 parameters");
    theta = *theta_star;
  }
  auto regressor = [](const VectorXd& x) {
    MatrixXd y = MatrixXd::Zero(2, 5);
    y(0, 0) = x(0);
    y(0, 1) = x(1);
    y(0, 2) = x(0) * x(1) * x(1);
    y(1, 3) = x(0);
    y(1, 4) = x(0) * x(0) * x(1);
    return y;
  };
  MatrixXd B(2, 1);
  B << 0.0, 1.0;
  auto g = [B](const VectorXd&) { return B; };
  MatrixXd A(2, 2);
  A << theta(0), theta(1), theta(3), 0.0;
  return PlantModel("polynomial", 2, 1, 5, regressor, theta, g,
                    Linearization{A, B, std::nullopt});
}

}  // namespace cladp

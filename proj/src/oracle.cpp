#include "cladp/oracle.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace cladp {

MatrixXd SolveLyapunov(const MatrixXd& A, const MatrixXd& C) {
  const Eigen::Index n = A.rows();
  Require(A.cols() == n && C.rows() == n && C.cols() == n,
          "Lyapunov operands must be n x n");
  const MatrixXd I = MatrixXd::Identity(n, n);
  // Column-major vec: vec(A'P) = (I (x) A') vec(P), vec(PA) = (A' (x) I) vec(P).
  MatrixXd K = MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) += I(i, j) * A.transpose();
      K.block(i * n, j * n, n, n) += A(j, i) * I;
    }
  const VectorXd rhs = -Eigen::Map<const VectorXd>(C.data(), n * n);
  Eigen::FullPivLU<MatrixXd> lu(K);
  if (!lu.isInvertible())
    throw std::runtime_error("Lyapunov operator is singular");
  const VectorXd vecP = lu.solve(rhs);
  MatrixXd P = Eigen::Map<const MatrixXd>(vecP.data(), n, n);
  return 0.5 * (P + P.transpose());
}

double CareResidual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                    const MatrixXd& R, const MatrixXd& P) {
  const MatrixXd res = A.transpose() * P + P * A -
                       P * B * R.llt().solve(B.transpose()) * P + Q;
  return res.cwiseAbs().maxCoeff();
}

bool IsHurwitz(const MatrixXd& A) {
  Eigen::EigenSolver<MatrixXd> es(A, false);
  return (es.eigenvalues().real().array() < 0.0).all();
}

MatrixXd StabilizingGain(const MatrixXd& A, const MatrixXd& B) {
  const Eigen::Index n = A.rows();
  Eigen::EigenSolver<MatrixXd> es(A, false);
  const double shift = std::max(0.0, es.eigenvalues().real().maxCoeff()) +
                       A.norm() + 1.0;
  const MatrixXd As = A + shift * MatrixXd::Identity(n, n);
  // (A + aI) Z + Z (A + aI)' = 2BB'  <=>  Lyapunov with A_l = -(A + aI)'.
  const MatrixXd Z = SolveLyapunov(-As.transpose(), 2.0 * B * B.transpose());
  Eigen::FullPivLU<MatrixXd> lu(Z);
  if (!lu.isInvertible())
    throw std::runtime_error("(A, B) is not controllable; supply K0");
  const MatrixXd K = B.transpose() * lu.inverse();
  if (!IsHurwitz(A - B * K))
    throw std::runtime_error("could not construct a stabilizing gain; supply K0");
  return K;
}

MatrixXd SolveCare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                   const MatrixXd& R, const std::optional<MatrixXd>& K0,
                   const CareOptions& options) {
  const Eigen::Index n = A.rows(), m = B.cols();
  Require(A.cols() == n && B.rows() == n, "A must be n x n and B n x m");
  Require(Q.rows() == n && Q.cols() == n, "Q must be n x n");
  Require(R.rows() == m && R.cols() == m, "R must be m x m");
  Require(IsPositiveDefinite(R), "R must be symmetric positive definite");
  const MatrixXd R_inv_Bt = R.llt().solve(B.transpose());

  MatrixXd K = K0 ? *K0 : StabilizingGain(A, B);
  Require(K.rows() == m && K.cols() == n, "K0 must be m x n");
  if (!IsHurwitz(A - B * K))
    throw std::runtime_error("initial gain does not stabilize A - B K");

  MatrixXd P = MatrixXd::Zero(n, n);
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < options.max_iterations; ++it) {
    const MatrixXd Ak = A - B * K;
    P = SolveLyapunov(Ak, Q + K.transpose() * R * K);
    K = R_inv_Bt * P;
    residual = CareResidual(A, B, Q, R, P);
    if (residual <= options.tolerance) break;
  }
  if (!(residual <= 1e-10))
    throw std::runtime_error("Newton-Kleinman iteration did not converge");
  return P;
}

VectorXd IdealWeights(const MatrixXd& P, const ValueBasis& basis) {
  const int n = basis.n();
  Require(P.rows() == n && P.cols() == n, "P dimension does not match basis");
  const ValueBasis quadratic = MakePolynomialBasis(n, {2});
  Require(basis.exponents() == quadratic.exponents(),
          "ideal weights need exactly the degree-2 monomial basis");
  VectorXd W(basis.size());
  for (int l = 0; l < basis.size(); ++l) {
    const auto& e = basis.exponents()[l];
    int i = -1, j = -1;
    for (int k = 0; k < n; ++k) {
      if (e[k] == 2) i = j = k;
      if (e[k] == 1) (i < 0 ? i : j) = k;
    }
    W(l) = (i == j) ? P(i, i) : P(i, j) + P(j, i);
  }
  return W;
}

LqrOracle MakeLqrOracle(const PlantModel& model, const CostSpec& cost,
                        const ValueBasis& basis) {
  const auto& lin = model.linearization();
  Require(lin.has_value(), "plant has no linearization for the LQR oracle");
  LqrOracle o;
  o.A = lin->A;
  o.B = lin->B;
  o.P = SolveCare(o.A, o.B, cost.Q(), cost.R(), lin->K0);
  o.K = cost.R_inverse() * o.B.transpose() * o.P;
  o.W_star = IdealWeights(o.P, basis);
  return o;
}

}  // namespace cladp

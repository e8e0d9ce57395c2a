#include "cladp/identifier.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace cladp {
namespace {

double GramMinEigenvalue(const MatrixXd& gram) {
  return std::max(0.0, MinEigenvalue(gram));
}

MatrixXd GramOf(const std::vector<StackRecord>& entries, int p) {
  MatrixXd gram = MatrixXd::Zero(p, p);
  for (const auto& e : entries) gram.noalias() += e.Y.transpose() * e.Y;
  return gram;
}

}  // namespace

StackRecord MakeStackRecord(const PlantModel& model, const VectorXd& x,
                            const VectorXd& u, const VectorXd& xdot) {
  Require(u.size() == model.m(), "recorded input has wrong dimension");
  Require(xdot.size() == model.n(), "recorded derivative has wrong dimension");
  return StackRecord{x, u, xdot, model.Regressor(x), model.Effectiveness(x)};
}

HistoryStack::HistoryStack(int capacity, int p)
    : capacity_(capacity), p_(p), gram_(MatrixXd::Zero(p, p)) {
  Require(capacity_ > 0, "history stack capacity must be positive");
  Require(p_ > 0, "parameter dimension must be positive");
}

void HistoryStack::Refresh() {
  gram_ = GramOf(entries_, p_);
  y_under_ = GramMinEigenvalue(gram_);
}

bool HistoryStack::Insert(StackRecord candidate) {
  Require(candidate.Y.cols() == p_, "candidate regressor has wrong width");
  if (!full()) {
    gram_.noalias() += candidate.Y.transpose() * candidate.Y;
    gram_ = (0.5 * (gram_ + gram_.transpose())).eval();
    entries_.push_back(std::move(candidate));
    // Adding a PSD term cannot lower the minimum eigenvalue; the max keeps
    // eigensolver noise on rank-deficient grams from showing up as a drop.
    y_under_ = std::max(y_under_, GramMinEigenvalue(gram_));
    return true;
  }
  const MatrixXd added = candidate.Y.transpose() * candidate.Y;
  int best = -1;
  double best_value = y_under_;
  for (int j = 0; j < size(); ++j) {
    const MatrixXd trial =
        gram_ - entries_[j].Y.transpose() * entries_[j].Y + added;
    const double value = GramMinEigenvalue(trial);
    if (value > best_value) {
      best_value = value;
      best = j;
    }
  }
  if (best < 0 || best_value <= y_under_ + 1e-12) return false;
  entries_[best] = std::move(candidate);
  // Rebuild from scratch so repeated swaps don't accumulate rounding.
  Refresh();
  return true;
}

MatrixXd HistoryStack::RecomputeGram() const { return GramOf(entries_, p_); }

RankCertificate CheckRank(const HistoryStack& stack, double threshold) {
  return {stack.y_under() > threshold, stack.y_under()};
}

IdentifierGains::IdentifierGains(VectorXd k_x_diagonal, MatrixXd Gamma_theta_,
                                 double k_theta_)
    : k_x(k_x_diagonal.asDiagonal()),
      Gamma_theta(std::move(Gamma_theta_)),
      k_theta(k_theta_) {
  Require(k_x_diagonal.size() > 0 && (k_x_diagonal.array() > 0.0).all(),
          "k_x must have a positive diagonal");
  Require(IsPositiveDefinite(Gamma_theta),
          "Gamma_theta must be symmetric positive definite");
  Require(k_theta >= 0.0, "k_theta must be nonnegative");
}

VectorXd ObserverDerivative(const IdentifierState& state,
                            const IdentifierGains& gains,
                            const PlantModel& model, const VectorXd& x,
                            const VectorXd& u) {
  Require(state.xhat.size() == model.n(), "xhat has wrong dimension");
  Require(state.thetahat.size() == model.p(), "thetahat has wrong dimension");
  Require(u.size() == model.m(), "input has wrong dimension");
  Require(gains.k_x.rows() == model.n(), "k_x has wrong dimension");
  return model.Regressor(x) * state.thetahat + model.Effectiveness(x) * u +
         gains.k_x * (x - state.xhat);
}

VectorXd ThetaUpdateDerivative(const IdentifierState& state,
                               const IdentifierGains& gains,
                               const HistoryStack& stack,
                               const PlantModel& model, const VectorXd& x,
                               const VectorXd& xtilde) {
  if (stack.empty())
    throw std::logic_error("history stack is empty; identifier unusable");
  Require(state.thetahat.size() == model.p(), "thetahat has wrong dimension");
  Require(xtilde.size() == model.n(), "xtilde has wrong dimension");
  Require(gains.Gamma_theta.rows() == model.p(), "Gamma_theta has wrong size");
  VectorXd history = VectorXd::Zero(model.p());
  for (const auto& e : stack.entries())
    history.noalias() +=
        e.Y.transpose() * (e.xdot - e.g * e.u - e.Y * state.thetahat);
  return gains.Gamma_theta *
         (model.Regressor(x).transpose() * xtilde + gains.k_theta * history);
}

VectorXd SmoothDerivative(std::span<const VectorXd> trajectory, double dt,
                          std::size_t index) {
  Require(dt > 0.0, "dt must be positive");
  if (index == 0 || index + 1 >= trajectory.size())
    throw std::out_of_range(
        "central difference needs a sample on each side of the index");
  return (trajectory[index + 1] - trajectory[index - 1]) / (2.0 * dt);
}

double IdentifierLyapunov(const VectorXd& xtilde, const VectorXd& thetatilde,
                          const IdentifierGains& gains) {
  const VectorXd scaled = gains.Gamma_theta.ldlt().solve(thetatilde);
  return 0.5 * xtilde.squaredNorm() + 0.5 * thetatilde.dot(scaled);
}

}  // namespace cladp

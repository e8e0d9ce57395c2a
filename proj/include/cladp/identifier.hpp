#pragma once

#include <span>
#include <vector>

#include "cladp/plant.hpp"
#include "cladp/types.hpp"

namespace cladp {

/// One recorded sample of the history stack. Y and g are cached at insert.
struct StackRecord {
  VectorXd x;
  VectorXd u;
  VectorXd xdot;
  MatrixXd Y;
  MatrixXd g;
};

StackRecord MakeStackRecord(const PlantModel& model, const VectorXd& x,
                            const VectorXd& u, const VectorXd& xdot);

/// Recorded (x_j, u_j, xdot_j) triples with the regressor Gram matrix
/// sum_j Y_j' Y_j and its minimum eigenvalue y_under.
class HistoryStack {
 public:
  HistoryStack(int capacity, int p);

  int capacity() const { return capacity_; }
  int p() const { return p_; }
  int size() const { return static_cast<int>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  bool full() const { return size() >= capacity_; }
  const std::vector<StackRecord>& entries() const { return entries_; }
  const MatrixXd& gram() const { return gram_; }
  double y_under() const { return y_under_; }

  /// Inserts below capacity. When full, swaps out the entry whose
  /// replacement yields the largest y_under, but only if that beats the
  /// current y_under by more than 1e-12. Returns whether it was accepted.
  bool Insert(StackRecord candidate);

  /// Gram matrix recomputed from the entries.
  MatrixXd RecomputeGram() const;

 private:
  void Refresh();

  int capacity_;
  int p_;
  std::vector<StackRecord> entries_;
  MatrixXd gram_;
  double y_under_ = 0.0;
};

struct RankCertificate {
  bool pass;
  double y_under;
};

RankCertificate CheckRank(const HistoryStack& stack, double threshold);

struct IdentifierState {
  VectorXd xhat;
  VectorXd thetahat;
};

struct IdentifierGains {
  IdentifierGains(VectorXd k_x_diagonal, MatrixXd Gamma_theta, double k_theta);

  MatrixXd k_x;  // diagonal
  MatrixXd Gamma_theta;
  double k_theta;
};

/// xhat_dot = Y(x) thetahat + g(x) u + k_x (x - xhat).
VectorXd ObserverDerivative(const IdentifierState& state,
                            const IdentifierGains& gains,
                            const PlantModel& model, const VectorXd& x,
                            const VectorXd& u);

/// thetahat_dot = Gamma_theta Y(x)' xtilde
///              + Gamma_theta k_theta sum_j Y_j' (xdot_j - g_j u_j - Y_j thetahat).
/// Throws std::logic_error on an empty stack.
VectorXd ThetaUpdateDerivative(const IdentifierState& state,
                               const IdentifierGains& gains,
                               const HistoryStack& stack,
                               const PlantModel& model, const VectorXd& x,
                               const VectorXd& xtilde);

/// Central difference (x[k+1] - x[k-1]) / (2 dt) on a uniformly sampled
/// trajectory. Boundary indices are rejected.
VectorXd SmoothDerivative(std::span<const VectorXd> trajectory, double dt,
                          std::size_t index);

/// V0 = 0.5 xtilde' xtilde + 0.5 thetatilde' Gamma_theta^-1 thetatilde.
double IdentifierLyapunov(const VectorXd& xtilde, const VectorXd& thetatilde,
                          const IdentifierGains& gains);

}  // namespace cladp

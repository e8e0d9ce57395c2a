#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cladp/adp.hpp"
#include "cladp/analysis.hpp"
#include "cladp/identifier.hpp"
#include "cladp/oracle.hpp"
#include "cladp/types.hpp"

namespace cladp {

struct SimConfig {
  double dt = 0.005;
  double t_final = 20.0;
  VectorXd x0;
  VectorXd xhat0;
  VectorXd thetahat0;
  VectorXd Wc0;
  VectorXd Wa0;
  MatrixXd Gamma0;
  int record_interval = 10;
  int rank_check_interval = 10;
  int log_interval = 1;
  std::uint64_t seed = 0;
  bool exact_derivatives = false;
  bool freeze_stack_after_rank = false;
  /// false: u = 0 and the critic/actor/Gamma laws are switched off, leaving
  /// only the identifier running.
  bool learning = true;
  double stack_rank_threshold = 1e-6;
  double sample_rank_threshold = 1e-6;

  void Validate() const;
};

/// Fully assembled closed-loop experiment.
struct Experiment {
  PlantModel model;
  CostSpec cost;
  ValueBasis basis;
  IdentifierGains identifier_gains;
  int stack_capacity;
  AdpGains adp_gains;
  SamplePointSet samples;
  SimConfig sim;
  /// Ideal weights when known (exact-basis plants).
  std::optional<VectorXd> W_star;

  Problem problem() const { return {model, cost, basis}; }
};

/// Flat augmented state [x, xhat, thetahat, W_c, W_a, vec(Gamma)], with
/// Gamma stored column-major.
struct StateLayout {
  int n, p, L;

  int x() const { return 0; }
  int xhat() const { return n; }
  int thetahat() const { return 2 * n; }
  int W_c() const { return 2 * n + p; }
  int W_a() const { return 2 * n + p + L; }
  int Gamma() const { return 2 * n + p + 2 * L; }
  int size() const { return 2 * n + p + 2 * L + L * L; }
};

VectorXd PackState(const StateLayout& layout, const VectorXd& x,
                   const VectorXd& xhat, const VectorXd& thetahat,
                   const VectorXd& W_c, const VectorXd& W_a,
                   const MatrixXd& Gamma);
MatrixXd UnpackGamma(const StateLayout& layout, const VectorXd& z);

/// Stacked derivative of the plant, observer, parameter, critic, actor and
/// Gamma laws. Before the history stack holds any record, the parameter
/// law runs on its instantaneous term alone.
VectorXd AugmentedDerivative(const Experiment& exp, const HistoryStack& stack,
                             const VectorXd& z);

using DerivativeFn = std::function<VectorXd(const VectorXd&)>;

/// Classical fourth-order Runge-Kutta step. Throws SimulationAborted on a
/// non-finite result.
VectorXd Rk4Step(const VectorXd& z, double dt, const DerivativeFn& f);

/// Symmetrizes Gamma inside `z` and rescales it onto ||Gamma|| = Gamma_bar
/// when the spectral norm exceeds Gamma_bar.
void ProjectGamma(const StateLayout& layout, double Gamma_bar, VectorXd* z);

class SimulationAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LogRecord {
  double t;
  VectorXd x, xhat, thetahat, W_c, W_a;
  double gamma_min_eig;
  double gamma_norm;
  double delta_hat;
  double max_delta_i;
  double y_under;
  double c_value;
  double V0;
  double theta_error;
  /// max over the current state and the sample points of
  /// ||omega/rho|| * 2 sqrt(nu lambda_min(Gamma)); <= 1 when the bound holds.
  double regressor_ratio;
  std::optional<double> Wc_error, Wa_error;
};

struct TrajectoryLog {
  std::vector<LogRecord> records;

  void WriteCsv(std::ostream& os) const;
  std::vector<double> Column(const std::function<double(const LogRecord&)>& get) const;
};

struct RunSummary {
  double final_state_norm = 0.0;
  std::optional<double> final_Wc_error;
  std::optional<double> final_Wa_error;
  double final_theta_error = 0.0;
  /// y_under at the first rank pass (it never decreases afterwards); 0 if
  /// the stack never passed.
  double min_y_under = 0.0;
  double final_y_under = 0.0;
  /// Infimum of the sample-set certificate over all scheduled checks.
  double min_c_value = 0.0;
  int gamma_bound_violations = 0;
  int regressor_bound_violations = 0;
  int sample_rank_failures = 0;
  long steps = 0;
  bool aborted = false;
  std::string abort_reason;
};

struct RunResult {
  TrajectoryLog log;
  RunSummary summary;
  HistoryStack stack;
};

/// Integrates the closed loop from t = 0 to t_final. A non-finite state
/// stops the run early and returns the partial log with `aborted` set.
RunResult RunExperiment(const Experiment& exp);

}  // namespace cladp

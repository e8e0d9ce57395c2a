#include "cladp/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace cladp {

void SimConfig::Validate() const {
  Require(dt > 0.0, "dt must be positive");
  Require(t_final >= 0.0, "t_final must be nonnegative");
  Require(record_interval >= 1 && rank_check_interval >= 1 && log_interval >= 1,
          "intervals must be at least 1");
  Require(stack_rank_threshold > 0.0 && sample_rank_threshold > 0.0,
          "rank thresholds must be positive");
}

VectorXd PackState(const StateLayout& s, const VectorXd& x,
                   const VectorXd& xhat, const VectorXd& thetahat,
                   const VectorXd& W_c, const VectorXd& W_a,
                   const MatrixXd& Gamma) {
  Require(x.size() == s.n && xhat.size() == s.n, "state blocks have wrong size");
  Require(thetahat.size() == s.p, "thetahat has wrong size");
  Require(W_c.size() == s.L && W_a.size() == s.L, "weights have wrong size");
  Require(Gamma.rows() == s.L && Gamma.cols() == s.L, "Gamma has wrong size");
  VectorXd z(s.size());
  z << x, xhat, thetahat, W_c, W_a,
      Eigen::Map<const VectorXd>(Gamma.data(), s.L * s.L);
  return z;
}

MatrixXd UnpackGamma(const StateLayout& s, const VectorXd& z) {
  return Eigen::Map<const MatrixXd>(z.data() + s.Gamma(), s.L, s.L);
}

namespace {

StateLayout LayoutOf(const Experiment& exp) {
  return {exp.model.n(), exp.model.p(), exp.basis.size()};
}

struct Unpacked {
  VectorXd x, xhat, thetahat;
  CriticActorState ca;
};

Unpacked Unpack(const StateLayout& s, const VectorXd& z) {
  return {z.segment(s.x(), s.n),
          z.segment(s.xhat(), s.n),
          z.segment(s.thetahat(), s.p),
          {z.segment(s.W_c(), s.L), z.segment(s.W_a(), s.L), UnpackGamma(s, z)}};
}

VectorXd ControlAt(const Experiment& exp, const VectorXd& x, const VectorXd& W_a) {
  if (!exp.sim.learning) return VectorXd::Zero(exp.model.m());
  return Policy(exp.problem(), W_a, x);
}

}  // namespace

VectorXd AugmentedDerivative(const Experiment& exp, const HistoryStack& stack,
                             const VectorXd& z) {
  const StateLayout s = LayoutOf(exp);
  Require(z.size() == s.size(), "augmented state has wrong size");
  const Unpacked st = Unpack(s, z);
  const Problem problem = exp.problem();

  const VectorXd u = ControlAt(exp, st.x, st.ca.W_a);
  const IdentifierState id{st.xhat, st.thetahat};
  const VectorXd xtilde = st.x - st.xhat;

  VectorXd dz = VectorXd::Zero(s.size());
  dz.segment(s.x(), s.n) = Dynamics(exp.model, st.x, u);
  dz.segment(s.xhat(), s.n) =
      ObserverDerivative(id, exp.identifier_gains, exp.model, st.x, u);
  dz.segment(s.thetahat(), s.p) =
      stack.empty()
          ? VectorXd(exp.identifier_gains.Gamma_theta *
                     (exp.model.Regressor(st.x).transpose() * xtilde))
          : ThetaUpdateDerivative(id, exp.identifier_gains, stack, exp.model,
                                  st.x, xtilde);
  if (!exp.sim.learning) return dz;

  const PointTerms current =
      EvaluatePoint(problem, exp.adp_gains, st.ca, st.thetahat, st.x);
  const auto terms = EvaluateSamplePoints(problem, exp.adp_gains, st.ca,
                                          exp.samples, st.thetahat);
  const CriticDerivativeResult critic =
      CriticDerivative(exp.adp_gains, st.ca, current, terms);
  dz.segment(s.W_c(), s.L) = critic.W_c_dot;
  dz.segment(s.W_a(), s.L) = ActorDerivative(exp.adp_gains, st.ca, current, terms);
  dz.segment(s.Gamma(), s.L * s.L) =
      Eigen::Map<const VectorXd>(critic.Gamma_dot.data(), s.L * s.L);
  return dz;
}

VectorXd Rk4Step(const VectorXd& z, double dt, const DerivativeFn& f) {
  Require(dt > 0.0, "dt must be positive");
  const VectorXd k1 = f(z);
  const VectorXd k2 = f(z + 0.5 * dt * k1);
  const VectorXd k3 = f(z + 0.5 * dt * k2);
  const VectorXd k4 = f(z + dt * k3);
  VectorXd next = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite())
    throw SimulationAborted("integration produced a non-finite state");
  return next;
}

void ProjectGamma(const StateLayout& s, double Gamma_bar, VectorXd* z) {
  MatrixXd G = UnpackGamma(s, *z);
  G = (0.5 * (G + G.transpose())).eval();
  const double norm = SpectralNorm(G);
  if (norm > Gamma_bar) G *= Gamma_bar / norm;
  Eigen::Map<MatrixXd>(z->data() + s.Gamma(), s.L, s.L) = G;
}

void TrajectoryLog::WriteCsv(std::ostream& os) const {
  if (records.empty()) return;
  const LogRecord& first = records.front();
  const bool has_oracle = first.Wc_error.has_value();
  auto header_block = [&os](const char* name, Eigen::Index count) {
    for (Eigen::Index i = 0; i < count; ++i) os << ',' << name << '_' << i;
  };
  os << 't';
  header_block("x", first.x.size());
  header_block("xhat", first.xhat.size());
  header_block("thetahat", first.thetahat.size());
  header_block("Wc", first.W_c.size());
  header_block("Wa", first.W_a.size());
  os << ",gamma_min_eig,gamma_norm,delta_hat,max_delta_i,y_under,c_value,V0,"
        "theta_error,regressor_ratio";
  if (has_oracle) os << ",Wc_error,Wa_error";
  os << '\n';

  const auto old_precision = os.precision();
  os << std::setprecision(17);
  auto block = [&os](const VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) os << ',' << v(i);
  };
  for (const auto& r : records) {
    os << r.t;
    block(r.x);
    block(r.xhat);
    block(r.thetahat);
    block(r.W_c);
    block(r.W_a);
    os << ',' << r.gamma_min_eig << ',' << r.gamma_norm << ',' << r.delta_hat
       << ',' << r.max_delta_i << ',' << r.y_under << ',' << r.c_value << ','
       << r.V0 << ',' << r.theta_error << ',' << r.regressor_ratio;
    if (has_oracle) os << ',' << *r.Wc_error << ',' << *r.Wa_error;
    os << '\n';
  }
  os.precision(old_precision);
}

std::vector<double> TrajectoryLog::Column(
    const std::function<double(const LogRecord&)>& get) const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(get(r));
  return out;
}

namespace {

// Candidate waiting for the next sample so its central difference can be
// formed.
struct PendingRecord {
  VectorXd x_before;
  VectorXd x;
  VectorXd u;
};

LogRecord MakeRecord(const Experiment& exp, const StateLayout& s,
                     const VectorXd& z, double t, const HistoryStack& stack,
                     double c_value) {
  const Unpacked st = Unpack(s, z);
  const Problem problem = exp.problem();
  LogRecord r;
  r.t = t;
  r.x = st.x;
  r.xhat = st.xhat;
  r.thetahat = st.thetahat;
  r.W_c = st.ca.W_c;
  r.W_a = st.ca.W_a;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(st.ca.Gamma, Eigen::EigenvaluesOnly);
  r.gamma_min_eig = es.eigenvalues().minCoeff();
  r.gamma_norm = es.eigenvalues().cwiseAbs().maxCoeff();

  const PointTerms current =
      EvaluatePoint(problem, exp.adp_gains, st.ca, st.thetahat, st.x);
  r.delta_hat = current.delta;
  const double scale =
      2.0 * std::sqrt(exp.adp_gains.nu * std::max(r.gamma_min_eig, 0.0));
  r.regressor_ratio = (current.omega / current.rho).norm() * scale;
  r.max_delta_i = 0.0;
  for (const auto& term :
       EvaluateSamplePoints(problem, exp.adp_gains, st.ca, exp.samples, st.thetahat)) {
    r.max_delta_i = std::max(r.max_delta_i, std::abs(term.delta));
    r.regressor_ratio =
        std::max(r.regressor_ratio, (term.omega / term.rho).norm() * scale);
  }
  r.y_under = stack.y_under();
  r.c_value = c_value;
  const VectorXd theta_err = exp.model.theta_star() - st.thetahat;
  r.theta_error = theta_err.norm();
  r.V0 = IdentifierLyapunov(st.x - st.xhat, theta_err, exp.identifier_gains);
  if (exp.W_star) {
    r.Wc_error = (*exp.W_star - st.ca.W_c).norm();
    r.Wa_error = (*exp.W_star - st.ca.W_a).norm();
  }
  return r;
}

}  // namespace

RunResult RunExperiment(const Experiment& exp) {
  exp.sim.Validate();
  exp.adp_gains.Validate();
  const StateLayout s = LayoutOf(exp);
  const SimConfig& cfg = exp.sim;
  Require(cfg.Gamma0.rows() == s.L && IsPositiveDefinite(cfg.Gamma0),
          "Gamma0 must be symmetric positive definite");
  Require(SpectralNorm(cfg.Gamma0) <= exp.adp_gains.Gamma_bar * (1.0 + 1e-12),
          "||Gamma0|| must not exceed Gamma_bar");
  Require(exp.samples.size() > 0, "sample set must not be empty");

  RunResult result{{}, {}, HistoryStack(exp.stack_capacity, s.p)};
  HistoryStack& stack = result.stack;
  RunSummary& summary = result.summary;

  VectorXd z = PackState(s, cfg.x0, cfg.xhat0, cfg.thetahat0, cfg.Wc0, cfg.Wa0,
                         cfg.Gamma0);
  const long steps = std::lround(cfg.t_final / cfg.dt);
  const Problem problem = exp.problem();

  std::optional<PendingRecord> pending;
  VectorXd x_prev;
  double c_value = std::numeric_limits<double>::quiet_NaN();
  double c_min = std::numeric_limits<double>::infinity();
  bool stack_passed = false;

  auto try_insert = [&](const VectorXd& x, const VectorXd& u, const VectorXd& xdot) {
    if (cfg.freeze_stack_after_rank && stack_passed) return;
    stack.Insert(MakeStackRecord(exp.model, x, u, xdot));
    if (!stack_passed && CheckRank(stack, cfg.stack_rank_threshold).pass) {
      stack_passed = true;
      summary.min_y_under = stack.y_under();
    }
  };

  const auto derivative = [&](const VectorXd& state) {
    return AugmentedDerivative(exp, stack, state);
  };

  long k = 0;
  try {
    for (;; ++k) {
      const double t = static_cast<double>(k) * cfg.dt;
      const VectorXd x = z.segment(s.x(), s.n);
      const VectorXd W_a = z.segment(s.W_a(), s.L);

      if (pending) {
        const std::array<VectorXd, 3> window = {pending->x_before, pending->x, x};
        try_insert(pending->x, pending->u, SmoothDerivative(window, cfg.dt, 1));
        pending.reset();
      }
      if (k % cfg.record_interval == 0) {
        const VectorXd u = ControlAt(exp, x, W_a);
        if (cfg.exact_derivatives) {
          try_insert(x, u, Dynamics(exp.model, x, u));
        } else if (k > 0 && k < steps) {
          pending = PendingRecord{x_prev, x, u};
        }
      }

      if (k % cfg.rank_check_interval == 0 || k == steps) {
        const CriticActorState ca{z.segment(s.W_c(), s.L), W_a, UnpackGamma(s, z)};
        const auto cert =
            CheckSampleRank(problem, exp.adp_gains, ca, exp.samples,
                            z.segment(s.thetahat(), s.p), cfg.sample_rank_threshold);
        c_value = cert.c_value;
        c_min = std::min(c_min, c_value);
        if (!cert.pass) ++summary.sample_rank_failures;
      }

      if (k % cfg.log_interval == 0 || k == steps) {
        LogRecord rec = MakeRecord(exp, s, z, t, stack, c_value);
        if (rec.gamma_min_eig < exp.adp_gains.Gamma_under ||
            rec.gamma_norm > exp.adp_gains.Gamma_bar * (1.0 + 1e-9))
          ++summary.gamma_bound_violations;
        if (rec.regressor_ratio > 1.0 + 1e-9) ++summary.regressor_bound_violations;
        result.log.records.push_back(std::move(rec));
      }

      if (k >= steps) break;
      x_prev = x;
      z = Rk4Step(z, cfg.dt, derivative);
      ProjectGamma(s, exp.adp_gains.Gamma_bar, &z);
    }
  } catch (const SimulationAborted& e) {
    summary.aborted = true;
    summary.abort_reason = e.what();
  }

  summary.steps = k;
  summary.min_c_value = std::isfinite(c_min) ? c_min : 0.0;
  summary.final_y_under = stack.y_under();
  const LogRecord& last = result.log.records.back();
  summary.final_state_norm = last.x.norm();
  summary.final_theta_error = last.theta_error;
  summary.final_Wc_error = last.Wc_error;
  summary.final_Wa_error = last.Wa_error;
  return result;
}

}  // namespace cladp

#include "cladp/adp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

namespace cladp {
namespace {

double RadicalInverse(int index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * (index % base);
    index /= base;
    f /= base;
  }
  return result;
}

constexpr std::array<int, 8> kHaltonBases = {2, 3, 5, 7, 11, 13, 17, 19};

// Saturation factor for the Gamma law; see CriticDerivative in adp.hpp.
double SaturationFactor(const MatrixXd& Gamma, const MatrixXd& update,
                        double Gamma_bar) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (Gamma + Gamma.transpose()));
  const Eigen::Index top = Gamma.rows() - 1;
  const double norm = std::abs(es.eigenvalues()(top));
  if (norm < Gamma_bar * (1.0 - 1e-12)) return 1.0;
  if (norm > Gamma_bar * (1.0 + 1e-12)) return 0.0;
  const VectorXd v = es.eigenvectors().col(top);
  return v.dot(update * v) > 0.0 ? 0.0 : 1.0;
}

}  // namespace

void AdpGains::Validate() const {
  Require(eta_c1 > 0 && eta_c2 > 0 && eta_a1 > 0,
          "eta_c1, eta_c2, eta_a1 must be positive");
  Require(eta_a2 >= 0, "eta_a2 must be nonnegative");
  Require(nu > 0, "nu must be positive");
  Require(beta > 0, "beta must be positive");
  Require(Gamma_bar > 0, "Gamma_bar must be positive");
  Require(Gamma_under > 0 && Gamma_under <= Gamma_bar,
          "Gamma_under must lie in (0, Gamma_bar]");
}

SamplePointSet::SamplePointSet(const Problem& problem,
                               std::vector<VectorXd> points, double radius)
    : radius_(radius), points_(std::move(points)) {
  Require(radius_ > 0, "sample ball radius must be positive");
  for (const auto& x : points_) {
    Require(x.size() == problem.model.n(), "sample point has wrong dimension");
    Require(x.allFinite(), "sample point must be finite");
    Require(x.norm() <= radius_ * (1.0 + 1e-12),
            "sample point lies outside the compact ball");
    sigma_grad_.push_back(problem.basis.SigmaGrad(x));
    g_.push_back(problem.model.Effectiveness(x));
    Y_.push_back(problem.model.Regressor(x));
    G_sigma_.push_back(GSigma(problem.basis, problem.model, problem.cost, x));
  }
}

std::vector<VectorXd> MakeSamplePoints(const VectorXd& half_width, int count,
                                       double jitter, std::uint64_t seed) {
  const int n = static_cast<int>(half_width.size());
  Require(n > 0 && n <= static_cast<int>(kHaltonBases.size()),
          "sample box dimension must be between 1 and 8");
  Require((half_width.array() > 0).all(), "sample box half widths must be positive");
  Require(count > 0, "sample point count must be positive");
  Require(jitter >= 0, "jitter must be nonnegative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<VectorXd> points;
  points.reserve(count);
  for (int k = 1; k <= count; ++k) {
    VectorXd x(n);
    for (int i = 0; i < n; ++i) {
      double s = 2.0 * RadicalInverse(k, kHaltonBases[i]) - 1.0;
      if (jitter > 0) s = std::clamp(s + jitter * unit(rng), -1.0, 1.0);
      x(i) = s * half_width(i);
    }
    points.push_back(std::move(x));
  }
  return points;
}

VectorXd Policy(const Problem& problem, const VectorXd& W_a, const VectorXd& x) {
  Require(W_a.size() == problem.basis.size(), "W_a has wrong dimension");
  Require(x.allFinite() && W_a.allFinite(), "policy inputs must be finite");
  return -0.5 * problem.cost.R_inverse() *
         (problem.model.Effectiveness(x).transpose() *
          (problem.basis.SigmaGrad(x).transpose() * W_a));
}

VectorXd Omega(const Problem& problem, const VectorXd& thetahat,
               const VectorXd& W_a, const VectorXd& x) {
  Require(thetahat.size() == problem.model.p(), "thetahat has wrong dimension");
  const VectorXd u = Policy(problem, W_a, x);
  return problem.basis.SigmaGrad(x) *
         (problem.model.Regressor(x) * thetahat +
          problem.model.Effectiveness(x) * u);
}

double NormalizationRho(const AdpGains& gains, const MatrixXd& Gamma,
                        const VectorXd& omega) {
  Require(Gamma.rows() == omega.size() && Gamma.cols() == omega.size(),
          "Gamma and omega dimensions differ");
  return 1.0 + gains.nu * omega.dot(Gamma * omega);
}

double BellmanErrorHat(const Problem& problem, const VectorXd& W_c,
                       const VectorXd& W_a, const VectorXd& thetahat,
                       const VectorXd& x) {
  Require(W_c.size() == problem.basis.size(), "W_c has wrong dimension");
  const VectorXd u = Policy(problem, W_a, x);
  return Omega(problem, thetahat, W_a, x).dot(W_c) +
         InstantaneousCost(problem.cost, x, u);
}

PointTerms EvaluatePoint(const Problem& problem, const AdpGains& gains,
                         const CriticActorState& state,
                         const VectorXd& thetahat, const VectorXd& x) {
  PointTerms t;
  const MatrixXd sg = problem.basis.SigmaGrad(x);
  const MatrixXd g = problem.model.Effectiveness(x);
  const VectorXd u =
      -0.5 * problem.cost.R_inverse() * (g.transpose() * (sg.transpose() * state.W_a));
  t.omega = sg * (problem.model.Regressor(x) * thetahat + g * u);
  t.rho = NormalizationRho(gains, state.Gamma, t.omega);
  t.delta = t.omega.dot(state.W_c) + InstantaneousCost(problem.cost, x, u);
  const MatrixXd sgg = sg * g;
  t.G_sigma = sgg * problem.cost.R_inverse() * sgg.transpose();
  return t;
}

std::vector<PointTerms> EvaluateSamplePoints(const Problem& problem,
                                             const AdpGains& gains,
                                             const CriticActorState& state,
                                             const SamplePointSet& samples,
                                             const VectorXd& thetahat) {
  Require(thetahat.size() == problem.model.p(), "thetahat has wrong dimension");
  Require(state.W_a.size() == problem.basis.size() &&
              state.W_c.size() == problem.basis.size(),
          "weights have wrong dimension");
  std::vector<PointTerms> terms(samples.size());
  for (int i = 0; i < samples.size(); ++i) {
    const VectorXd& x = samples.points()[i];
    const MatrixXd& sg = samples.sigma_grad(i);
    const MatrixXd& g = samples.g(i);
    const VectorXd u = -0.5 * problem.cost.R_inverse() *
                       (g.transpose() * (sg.transpose() * state.W_a));
    PointTerms& t = terms[i];
    t.omega = sg * (samples.Y(i) * thetahat + g * u);
    t.rho = NormalizationRho(gains, state.Gamma, t.omega);
    t.delta = t.omega.dot(state.W_c) + InstantaneousCost(problem.cost, x, u);
    t.G_sigma = samples.G_sigma(i);
  }
  return terms;
}

CriticDerivativeResult CriticDerivative(const AdpGains& gains,
                                        const CriticActorState& state,
                                        const PointTerms& current,
                                        std::span<const PointTerms> samples) {
  if (samples.empty())
    throw std::logic_error("critic law needs at least one sample point");
  const double N = static_cast<double>(samples.size());
  const Eigen::Index L = state.W_c.size();
  VectorXd sum = VectorXd::Zero(L);
  for (const auto& s : samples) sum += (s.delta / s.rho) * s.omega;
  CriticDerivativeResult r;
  r.W_c_dot = -state.Gamma * (gains.eta_c1 * (current.delta / current.rho) *
                                  current.omega +
                              (gains.eta_c2 / N) * sum);
  const VectorXd Gw = state.Gamma * current.omega;
  const MatrixXd update = gains.beta * state.Gamma -
                          (gains.eta_c1 / current.rho) * Gw * Gw.transpose();
  r.Gamma_dot = SaturationFactor(state.Gamma, update, gains.Gamma_bar) * update;
  return r;
}

VectorXd ActorDerivative(const AdpGains& gains, const CriticActorState& state,
                         const PointTerms& current,
                         std::span<const PointTerms> samples) {
  if (samples.empty())
    throw std::logic_error("actor law needs at least one sample point");
  const double N = static_cast<double>(samples.size());
  // (sum_k c_k G_k' W_a omega_k') W_c = sum_k c_k (omega_k' W_c) G_k' W_a
  VectorXd correction = (gains.eta_c1 * current.omega.dot(state.W_c) /
                         (4.0 * current.rho)) *
                        (current.G_sigma.transpose() * state.W_a);
  for (const auto& s : samples)
    correction += (gains.eta_c2 * s.omega.dot(state.W_c) / (4.0 * N * s.rho)) *
                  (s.G_sigma.transpose() * state.W_a);
  return -gains.eta_a1 * (state.W_a - state.W_c) - gains.eta_a2 * state.W_a +
         correction;
}

CriticDerivativeResult CriticDerivative(const Problem& problem,
                                        const AdpGains& gains,
                                        const CriticActorState& state,
                                        const SamplePointSet& samples,
                                        const VectorXd& thetahat,
                                        const VectorXd& x) {
  const auto terms = EvaluateSamplePoints(problem, gains, state, samples, thetahat);
  return CriticDerivative(gains, state,
                          EvaluatePoint(problem, gains, state, thetahat, x),
                          terms);
}

VectorXd ActorDerivative(const Problem& problem, const AdpGains& gains,
                         const CriticActorState& state,
                         const SamplePointSet& samples,
                         const VectorXd& thetahat, const VectorXd& x) {
  const auto terms = EvaluateSamplePoints(problem, gains, state, samples, thetahat);
  return ActorDerivative(gains, state,
                         EvaluatePoint(problem, gains, state, thetahat, x),
                         terms);
}

SampleRankCertificate CheckSampleRank(std::span<const VectorXd> omegas,
                                      std::span<const double> rhos,
                                      double threshold) {
  Require(!omegas.empty(), "sample rank needs at least one point");
  Require(omegas.size() == rhos.size(), "omega and rho counts differ");
  const Eigen::Index L = omegas.front().size();
  MatrixXd sum = MatrixXd::Zero(L, L);
  for (std::size_t i = 0; i < omegas.size(); ++i)
    sum.noalias() += omegas[i] * omegas[i].transpose() / rhos[i];
  const double c =
      std::max(0.0, MinEigenvalue(sum)) / static_cast<double>(omegas.size());
  return {c, c > threshold};
}

SampleRankCertificate CheckSampleRank(const Problem& problem,
                                      const AdpGains& gains,
                                      const CriticActorState& state,
                                      const SamplePointSet& samples,
                                      const VectorXd& thetahat,
                                      double threshold) {
  const auto terms = EvaluateSamplePoints(problem, gains, state, samples, thetahat);
  std::vector<VectorXd> omegas;
  std::vector<double> rhos;
  for (const auto& t : terms) {
    omegas.push_back(t.omega);
    rhos.push_back(t.rho);
  }
  return CheckSampleRank(omegas, rhos, threshold);
}

double ResidualDecomposition(const Problem& problem, const VectorXd& W_star,
                             const VectorXd& W_c, const VectorXd& W_a,
                             const VectorXd& thetahat, const VectorXd& x,
                             const EpsilonGradFn& eps_grad) {
  Require(W_star.size() == problem.basis.size(), "W_star has wrong dimension");
  const VectorXd Wc_err = W_star - W_c;
  const VectorXd Wa_err = W_star - W_a;
  const VectorXd theta_err = problem.model.theta_star() - thetahat;
  const MatrixXd sg = problem.basis.SigmaGrad(x);
  const MatrixXd Y = problem.model.Regressor(x);
  const MatrixXd G_sigma = GSigma(problem.basis, problem.model, problem.cost, x);
  double r = -Omega(problem, thetahat, W_a, x).dot(Wc_err) -
             W_star.dot(sg * (Y * theta_err)) +
             0.25 * Wa_err.dot(G_sigma * Wa_err);
  if (eps_grad) {
    const VectorXd e = eps_grad(x);
    Require(e.size() == problem.model.n(), "eps gradient has wrong dimension");
    const MatrixXd g = problem.model.Effectiveness(x);
    const MatrixXd G = g * problem.cost.R_inverse() * g.transpose();
    r += 0.25 * e.dot(G * e) - e.dot(Drift(problem.model, x)) +
         0.5 * W_star.dot(sg * (G * e));
  }
  return r;
}

}  // namespace cladp

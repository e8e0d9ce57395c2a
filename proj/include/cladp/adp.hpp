#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cladp/basis.hpp"
#include "cladp/plant.hpp"
#include "cladp/types.hpp"

namespace cladp {

/// Non-owning bundle of the three objects every value-function evaluation
/// needs. The referenced objects must outlive the bundle.
struct Problem {
  const PlantModel& model;
  const CostSpec& cost;
  const ValueBasis& basis;
};

struct CriticActorState {
  VectorXd W_c;
  VectorXd W_a;
  MatrixXd Gamma;
};

struct AdpGains {
  double eta_c1 = 1.0;
  double eta_c2 = 1.0;
  double eta_a1 = 1.0;
  double eta_a2 = 0.01;
  double nu = 1.0;
  double beta = 1.0;
  double Gamma_bar = 100.0;
  double Gamma_under = 0.5;

  /// Throws ContractViolation unless every gain is positive (eta_a2 may be
  /// zero) and Gamma_under <= Gamma_bar.
  void Validate() const;
};

/// Pre-sampled Bellman-error evaluation points with the quantities that do
/// not depend on the learner state cached per point.
class SamplePointSet {
 public:
  /// Throws if any point lies outside the ball of radius `radius`.
  SamplePointSet(const Problem& problem, std::vector<VectorXd> points,
                 double radius);

  int size() const { return static_cast<int>(points_.size()); }
  double radius() const { return radius_; }
  const std::vector<VectorXd>& points() const { return points_; }
  const MatrixXd& sigma_grad(int i) const { return sigma_grad_[i]; }
  const MatrixXd& g(int i) const { return g_[i]; }
  const MatrixXd& Y(int i) const { return Y_[i]; }
  const MatrixXd& G_sigma(int i) const { return G_sigma_[i]; }

 private:
  double radius_;
  std::vector<VectorXd> points_;
  std::vector<MatrixXd> sigma_grad_, g_, Y_, G_sigma_;
};

/// `count` points from the Halton sequence (bases 2, 3, 5, ...) scaled to
/// the box [-half_width_i, half_width_i]. With `jitter` > 0 each coordinate
/// is perturbed by a uniform draw of that fraction of the half width, then
/// clamped back into the box.
std::vector<VectorXd> MakeSamplePoints(const VectorXd& half_width, int count,
                                       double jitter = 0.0,
                                       std::uint64_t seed = 0);

/// u = -1/2 R^-1 g(x)' sigma'(x)' W_a.
VectorXd Policy(const Problem& problem, const VectorXd& W_a, const VectorXd& x);

/// omega = sigma'(x) (Y(x) thetahat + g(x) u(x, W_a)).
VectorXd Omega(const Problem& problem, const VectorXd& thetahat,
               const VectorXd& W_a, const VectorXd& x);

/// rho = 1 + nu omega' Gamma omega.
double NormalizationRho(const AdpGains& gains, const MatrixXd& Gamma,
                        const VectorXd& omega);

/// delta_hat = omega' W_c + x'Qx + u'Ru with u = Policy(W_a, x).
double BellmanErrorHat(const Problem& problem, const VectorXd& W_c,
                       const VectorXd& W_a, const VectorXd& thetahat,
                       const VectorXd& x);

/// Regressor, normalization and Bellman error at one point.
struct PointTerms {
  VectorXd omega;
  double rho;
  double delta;
  MatrixXd G_sigma;
};

PointTerms EvaluatePoint(const Problem& problem, const AdpGains& gains,
                         const CriticActorState& state,
                         const VectorXd& thetahat, const VectorXd& x);

/// Terms at every sample point, using the cached per-point data.
std::vector<PointTerms> EvaluateSamplePoints(const Problem& problem,
                                             const AdpGains& gains,
                                             const CriticActorState& state,
                                             const SamplePointSet& samples,
                                             const VectorXd& thetahat);

struct CriticDerivativeResult {
  VectorXd W_c_dot;
  MatrixXd Gamma_dot;
};

/// Least-squares critic law with forgetting and norm saturation.
///
/// The saturation factor is 1 while ||Gamma|| < Gamma_bar. On the boundary
/// (within a relative 1e-12) it stays 1 only if the update does not push the
/// spectral norm outward; above Gamma_bar it is 0.
CriticDerivativeResult CriticDerivative(const AdpGains& gains,
                                        const CriticActorState& state,
                                        const PointTerms& current,
                                        std::span<const PointTerms> samples);

VectorXd ActorDerivative(const AdpGains& gains, const CriticActorState& state,
                         const PointTerms& current,
                         std::span<const PointTerms> samples);

/// Convenience overloads that evaluate the current point and the sample set.
/// Both throw std::logic_error for an empty sample set.
CriticDerivativeResult CriticDerivative(const Problem& problem,
                                        const AdpGains& gains,
                                        const CriticActorState& state,
                                        const SamplePointSet& samples,
                                        const VectorXd& thetahat,
                                        const VectorXd& x);
VectorXd ActorDerivative(const Problem& problem, const AdpGains& gains,
                         const CriticActorState& state,
                         const SamplePointSet& samples,
                         const VectorXd& thetahat, const VectorXd& x);

struct SampleRankCertificate {
  double c_value;
  bool pass;
};

/// c = (1/N) lambda_min(sum_i omega_i omega_i' / rho_i).
SampleRankCertificate CheckSampleRank(std::span<const VectorXd> omegas,
                                      std::span<const double> rhos,
                                      double threshold);
SampleRankCertificate CheckSampleRank(const Problem& problem,
                                      const AdpGains& gains,
                                      const CriticActorState& state,
                                      const SamplePointSet& samples,
                                      const VectorXd& thetahat,
                                      double threshold);

/// Gradient of the value-function reconstruction error, x -> eps'(x) (1 x n
/// row returned as a length-n vector). Empty means eps identically zero.
using EpsilonGradFn = std::function<VectorXd(const VectorXd&)>;

/// Bellman error written in terms of the estimation errors
///   -omega' Wc~ - W*' sigma' Y theta~ + 1/4 Wa~' G_sigma Wa~
///   + 1/4 G_eps - eps' f + 1/2 W*' sigma' G eps'^T
/// with Wc~ = W* - W_c, Wa~ = W* - W_a, theta~ = theta* - thetahat.
/// Needs theta* and W*, so it is a diagnostic, not part of the learning law.
double ResidualDecomposition(const Problem& problem, const VectorXd& W_star,
                             const VectorXd& W_c, const VectorXd& W_a,
                             const VectorXd& thetahat, const VectorXd& x,
                             const EpsilonGradFn& eps_grad = {});

}  // namespace cladp

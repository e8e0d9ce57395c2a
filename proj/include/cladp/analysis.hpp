#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "cladp/adp.hpp"
#include "cladp/identifier.hpp"
#include "cladp/types.hpp"

namespace cladp {

/// Everything the sufficient gain conditions depend on.
struct GainInputs {
  double W_bar = 0.0;          // bound on ||W*||
  double eps_bar = 0.0;        // bound on |eps|
  double eps_prime_bar = 0.0;  // bound on ||eps'||
  double L_f = 0.0;
  double L_Y = 0.0;
  double Z_bar = 1.0;  // radius of the compact set chi
  double zeta1 = 1.0;
  double zeta2 = 1.0;
  double Gamma_under = 1.0;
  double nu = 1.0;
  double eta_c1 = 0.0;
  double eta_c2 = 0.0;
  double eta_a1 = 0.0;
  double eta_a2 = 0.0;
  double k_theta = 0.0;
  double q_under = 0.0;
  double y_under = 0.0;
  double c_under = 0.0;

  void Validate() const;
};

/// Deterministic grid over the ball ||x|| <= radius: 2^level + 1 points per
/// axis on [-radius, radius]^n, filtered to the ball. Grids of increasing
/// level are nested.
std::vector<VectorXd> BallGrid(int n, double radius, int level);

inline constexpr double kSupInflation = 1.1;

struct LipschitzEstimate {
  double L_f;
  double L_Y;
};

/// max ||f(x)||/||x|| and max ||Y(x)||/||x|| over the nonzero grid points,
/// times kSupInflation.
LipschitzEstimate EstimateLipschitz(const PlantModel& model, double Z_bar,
                                    int level);

/// Grid suprema over chi (inflated by kSupInflation) used by the constants.
struct SupEstimates {
  double sigma_grad = 0.0;  // sup ||sigma'||
  double G_sigma = 0.0;     // sup ||G_sigma||
  double G = 0.0;           // sup ||g R^-1 g'||
};

SupEstimates EstimateSups(const Problem& problem, double Z_bar, int level);

using Varthetas = std::array<double, 7>;

/// The seven constants of the stability analysis. Sample-point sums use the
/// exact per-point norms; the eps-dependent terms of the fifth and sixth
/// constants are bounded term by term with the triangle inequality.
Varthetas ComputeVarthetas(const GainInputs& inputs, const SupEstimates& sups,
                           const Problem& problem,
                           const SamplePointSet& samples);

enum class GainCondition { kEtaA2 = 0, kKTheta = 1, kQUnder = 2, kEtaC2 = 3 };

struct GainReport {
  Varthetas vartheta{};
  /// Left minus right side of each inequality, ordered as GainCondition.
  std::array<double, 4> margins{};
  bool pass = false;
  bool missing_stack_certificate = false;   // y_under <= 0
  bool missing_sample_certificate = false;  // c_under <= 0
};

GainReport CheckGainConditions(const GainInputs& inputs,
                               const Varthetas& vartheta);

struct DecayCertificate {
  bool pass = true;
  double rate = 0.0;            // v / v_bar
  double start_time = 0.0;      // first logged time with a full-rank stack
  double y_under = 0.0;         // value used in the rate
  double worst_ratio = 0.0;     // max V0(t) / bound(t)
  bool rank_reached = false;
};

/// Checks V0(t) <= V0(t_r) exp(-(v / v_bar)(t - t_r)) (1 + 1e-6) at every
/// logged sample from the first one whose stack passes the rank test, with
/// v = min(min eig k_x, y_under k_theta) and v_bar = 1/2 max(1, max eig
/// Gamma_theta^-1). `y_under_override` replaces the logged y_under at t_r.
DecayCertificate IdentifierDecayCertificate(std::span<const double> times,
                                            std::span<const double> V0,
                                            std::span<const double> y_under,
                                            const IdentifierGains& gains,
                                            double rank_threshold,
                                            double y_under_override = -1.0);

}  // namespace cladp

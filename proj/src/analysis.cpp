#include "cladp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cladp {

void GainInputs::Validate() const {
  for (double v : {W_bar, eps_bar, eps_prime_bar, L_f, L_Y, nu, eta_c1, eta_c2,
                   eta_a1, eta_a2, k_theta, q_under})
    Require(v >= 0.0 && std::isfinite(v), "gain inputs must be finite and nonnegative");
  Require(Z_bar > 0.0, "Z_bar must be positive");
  Require(zeta1 > 0.0 && zeta2 > 0.0, "zeta1 and zeta2 must be positive");
  Require(Gamma_under > 0.0, "Gamma_under must be positive");
  Require(nu > 0.0, "nu must be positive");
}

std::vector<VectorXd> BallGrid(int n, double radius, int level) {
  Require(n > 0, "grid dimension must be positive");
  Require(radius > 0.0, "grid radius must be positive");
  Require(level >= 0 && level <= 20, "grid level must be in [0, 20]");
  const long per_axis = (1L << level) + 1;
  long total = 1;
  for (int i = 0; i < n; ++i) {
    total *= per_axis;
    Require(total <= 50'000'000, "grid too large; lower the level");
  }
  std::vector<VectorXd> points;
  std::vector<long> idx(n, 0);
  for (long k = 0; k < total; ++k) {
    long rem = k;
    VectorXd x(n);
    for (int i = 0; i < n; ++i) {
      idx[i] = rem % per_axis;
      rem /= per_axis;
      x(i) = -radius + 2.0 * radius * static_cast<double>(idx[i]) /
                           static_cast<double>(per_axis - 1);
    }
    if (x.norm() <= radius * (1.0 + 1e-12)) points.push_back(std::move(x));
  }
  return points;
}

LipschitzEstimate EstimateLipschitz(const PlantModel& model, double Z_bar,
                                    int level) {
  Require(Z_bar > 0.0, "Z_bar must be positive");
  double lf = 0.0, ly = 0.0;
  for (const auto& x : BallGrid(model.n(), Z_bar, level)) {
    const double r = x.norm();
    if (r == 0.0) continue;
    lf = std::max(lf, Drift(model, x).norm() / r);
    ly = std::max(ly, SpectralNorm(model.Regressor(x)) / r);
  }
  return {kSupInflation * lf, kSupInflation * ly};
}

SupEstimates EstimateSups(const Problem& problem, double Z_bar, int level) {
  SupEstimates s;
  for (const auto& x : BallGrid(problem.model.n(), Z_bar, level)) {
    const MatrixXd g = problem.model.Effectiveness(x);
    s.sigma_grad = std::max(s.sigma_grad, SpectralNorm(problem.basis.SigmaGrad(x)));
    s.G_sigma = std::max(
        s.G_sigma, SpectralNorm(GSigma(problem.basis, problem.model, problem.cost, x)));
    s.G = std::max(s.G, SpectralNorm(g * problem.cost.R_inverse() * g.transpose()));
  }
  s.sigma_grad *= kSupInflation;
  s.G_sigma *= kSupInflation;
  s.G *= kSupInflation;
  return s;
}

Varthetas ComputeVarthetas(const GainInputs& in, const SupEstimates& sups,
                           const Problem& problem,
                           const SamplePointSet& samples) {
  in.Validate();
  Require(samples.size() > 0, "constants need at least one sample point");
  const double N = samples.size();
  const double root = std::sqrt(in.nu * in.Gamma_under);
  const double ep = in.eps_prime_bar;

  double sigmaY_sum = 0.0, Gsigma_sum = 0.0, delta_sum = 0.0;
  for (int i = 0; i < samples.size(); ++i) {
    const MatrixXd& sg = samples.sigma_grad(i);
    const MatrixXd& g = samples.g(i);
    const double G_norm =
        SpectralNorm(g * problem.cost.R_inverse() * g.transpose());
    sigmaY_sum += SpectralNorm(sg * samples.Y(i));
    Gsigma_sum += SpectralNorm(samples.G_sigma(i));
    const double f_norm = (samples.Y(i) * problem.model.theta_star()).norm();
    // |Delta_i| <= 1/2 W ||sigma_i'|| ||G_i|| eps' + 1/4 ||G_i|| eps'^2 + eps' ||f_i||
    delta_sum += 0.5 * in.W_bar * SpectralNorm(sg) * G_norm * ep +
                 0.25 * G_norm * ep * ep + ep * f_norm;
  }

  Varthetas v{};
  v[0] = in.eta_c1 * in.L_f * ep / (4.0 * root);
  v[1] = in.eta_c2 * sigmaY_sum * in.W_bar / (4.0 * N * root);
  v[2] = in.L_Y * in.eta_c1 * in.W_bar * sups.sigma_grad / (4.0 * root);
  v[3] = 0.25 * sups.G * ep * ep;
  // ||omega / rho|| <= 1 / (2 root) bounds both normalized regressors.
  v[4] = in.eta_c1 *
             (2.0 * in.W_bar * sups.sigma_grad * sups.G * ep + sups.G * ep * ep) /
             (4.0 * 2.0 * root) +
         in.eta_c2 * delta_sum / (N * 2.0 * root);
  v[6] = in.eta_c1 * sups.G_sigma / (8.0 * root) +
         in.eta_c2 * Gsigma_sum / (8.0 * N * root);
  v[5] = 0.5 * in.W_bar * sups.G_sigma + 0.5 * ep * sups.G * sups.sigma_grad +
         v[6] * in.W_bar * in.W_bar + in.eta_a2 * in.W_bar;
  return v;
}

GainReport CheckGainConditions(const GainInputs& in, const Varthetas& t) {
  in.Validate();
  GainReport r;
  r.vartheta = t;
  const double inf = std::numeric_limits<double>::infinity();
  r.missing_stack_certificate = !(in.y_under > 0.0);
  r.missing_sample_certificate = !(in.c_under > 0.0);

  r.margins[0] = in.eta_a2 - (-in.eta_a1 / 2.0 +
                              t[6] * in.W_bar * (2.0 * in.zeta2 + 1.0) / (2.0 * in.zeta2));
  r.margins[1] = r.missing_stack_certificate
                     ? -inf
                     : in.k_theta - (t[1] + in.zeta1 * t[2] * in.Z_bar) /
                                        (in.y_under * in.zeta1);
  r.margins[2] = in.q_under - t[0];
  r.margins[3] =
      r.missing_sample_certificate
          ? -inf
          : in.eta_c2 - (in.zeta2 * t[6] * in.W_bar + in.eta_a1 +
                         2.0 * (t[0] + in.zeta1 * t[1] + t[2] * in.Z_bar)) /
                            (2.0 * in.c_under);
  r.pass = std::all_of(r.margins.begin(), r.margins.end(),
                       [](double m) { return m > 0.0; });
  return r;
}

DecayCertificate IdentifierDecayCertificate(std::span<const double> times,
                                            std::span<const double> V0,
                                            std::span<const double> y_under,
                                            const IdentifierGains& gains,
                                            double rank_threshold,
                                            double y_under_override) {
  Require(times.size() == V0.size() && times.size() == y_under.size(),
          "log columns must have equal length");
  DecayCertificate c;
  std::size_t start = 0;
  while (start < times.size() && !(y_under[start] > rank_threshold)) ++start;
  if (start == times.size()) return c;  // nothing to certify

  c.rank_reached = true;
  c.start_time = times[start];
  c.y_under = y_under_override > 0.0 ? y_under_override : y_under[start];
  const MatrixXd Gamma_inv = gains.Gamma_theta.inverse();
  const double v = std::min(MinEigenvalue(gains.k_x), c.y_under * gains.k_theta);
  const double v_bar = 0.5 * std::max(1.0, MaxEigenvalue(Gamma_inv));
  c.rate = v / v_bar;

  const double V_start = V0[start];
  for (std::size_t k = start; k < times.size(); ++k) {
    const double bound =
        V_start * std::exp(-c.rate * (times[k] - c.start_time)) * (1.0 + 1e-6);
    if (V0[k] > bound) c.pass = false;
    if (bound > 0.0) c.worst_ratio = std::max(c.worst_ratio, V0[k] / bound);
  }
  return c;
}

}  // namespace cladp

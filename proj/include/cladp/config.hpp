#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cladp/analysis.hpp"
#include "cladp/sim.hpp"
#include "cladp/types.hpp"

namespace cladp {

/// Bad configuration. The message starts with the offending key path, e.g.
/// "[cost].R: must be symmetric positive definite".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed and validated experiment configuration.
///
/// File format: INI-style sections `[plant] [cost] [basis] [identifier]
/// [adp] [analysis] [sim]` with `key = value` lines. Vectors are separated
/// by spaces or commas; matrix rows are separated by `;`. A scalar given
/// for a diagonal gain or box is broadcast. Lines starting with `#` or `;`
/// are comments.
struct ExperimentConfig {
  struct Plant {
    std::string model;  // "linear" or "polynomial"
    MatrixXd A, B;
    std::optional<MatrixXd> K0;
    std::optional<VectorXd> theta;
  } plant;

  struct Cost {
    MatrixXd Q, R;
  } cost;

  struct Basis {
    std::vector<int> degrees{2};
  } basis;

  struct Identifier {
    VectorXd k_x;
    MatrixXd Gamma_theta;
    double k_theta = 1.0;
    std::optional<int> stack_capacity;
    int record_interval = 10;
    bool exact_derivatives = false;
    bool freeze_stack_after_rank = false;
    double rank_threshold = 1e-6;
  } identifier;

  struct Adp {
    AdpGains gains;
    std::optional<int> num_points;
    VectorXd box;
    double jitter = 0.0;
    double gamma0 = 1.0;
    std::optional<VectorXd> Wc0, Wa0;
    double rank_threshold = 1e-6;
  } adp;

  struct Analysis {
    std::optional<double> W_bar;
    double eps_bar = 0.0;
    double eps_prime_bar = 0.0;
    std::optional<double> Z_bar;
    double zeta1 = 1.0;
    double zeta2 = 1.0;
    int grid_level = 6;
    std::optional<double> y_under;
    std::optional<double> c_under;
  } analysis;

  struct Sim {
    double dt = 0.005;
    double t_final = 0.0;
    VectorXd x0;
    std::optional<VectorXd> xhat0;
    std::optional<VectorXd> thetahat0;
    int rank_check_interval = 10;
    int log_interval = 1;
    std::uint64_t seed = 0;
    bool learning = true;
  } sim;
};

ExperimentConfig ParseConfigText(const std::string& text);
/// Throws ConfigError on I/O failure too.
ExperimentConfig ParseConfig(const std::string& path);

PlantModel BuildPlant(const ExperimentConfig& cfg);

/// Assembles the plant, basis, gains, sample points and initial conditions.
/// W_star is filled from the LQR oracle when the basis is the degree-2
/// monomial set and the plant carries a linearization.
Experiment BuildExperiment(const ExperimentConfig& cfg);

/// Resolved Z_bar (configured, else 2 ||x0||, else 1).
double ResolveZBar(const ExperimentConfig& cfg);

/// Gain inputs with y_under and c_under from the configuration when given,
/// otherwise from the supplied run certificates.
GainInputs BuildGainInputs(const ExperimentConfig& cfg, const Experiment& exp,
                           double y_under, double c_under);

GainReport EvaluateGains(const ExperimentConfig& cfg, const Experiment& exp,
                         double y_under, double c_under);

}  // namespace cladp

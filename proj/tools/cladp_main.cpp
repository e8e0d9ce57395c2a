// Command-line front end: run | check-gains | oracle.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cladp/config.hpp"
#include "cladp/report.hpp"
#include "cladp/sim.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAborted = 2;
constexpr int kExitGainsFail = 3;

struct Options {
  std::string config;
  std::string out = "./out";
  bool out_given = false;
  std::optional<long long> seed;
};

cladp::ExperimentConfig LoadConfig(const Options& opt) {
  cladp::ExperimentConfig cfg = cladp::ParseConfig(opt.config);
  if (opt.seed) {
    if (*opt.seed < 0) throw cladp::ConfigError("--seed: must be nonnegative");
    cfg.sim.seed = static_cast<std::uint64_t>(*opt.seed);
  }
  return cfg;
}

void WriteJson(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// JSON goes to stdout unless an output directory was requested.
void Emit(const Options& opt, const std::string& file, const nlohmann::json& j) {
  if (!opt.out_given) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  fs::create_directories(opt.out);
  WriteJson(fs::path(opt.out) / file, j);
}

int Run(const Options& opt) {
  const cladp::ExperimentConfig cfg = LoadConfig(opt);
  const cladp::Experiment exp = cladp::BuildExperiment(cfg);
  const cladp::RunResult result = cladp::RunExperiment(exp);

  std::optional<nlohmann::json> gains_json;
  try {
    const auto inputs = cladp::BuildGainInputs(cfg, exp, result.summary.min_y_under,
                                               result.summary.min_c_value);
    const auto report = cladp::EvaluateGains(cfg, exp, result.summary.min_y_under,
                                             result.summary.min_c_value);
    if (!report.pass)
      std::cerr << "warning: sufficient gain conditions are not satisfied\n";
    gains_json = cladp::GainReportJson(report, inputs);
  } catch (const cladp::ConfigError& e) {
    std::cerr << "warning: gain report unavailable: " << e.what() << '\n';
  }

  fs::create_directories(opt.out);
  {
    std::ofstream csv(fs::path(opt.out) / "trajectory.csv");
    if (!csv) throw std::runtime_error("cannot write trajectory.csv");
    result.log.WriteCsv(csv);
  }
  WriteJson(fs::path(opt.out) / "summary.json",
            cladp::SummaryJson(result.summary, gains_json));
  if (result.summary.aborted) {
    std::cerr << "simulation aborted: " << result.summary.abort_reason << '\n';
    return kExitAborted;
  }
  return kExitOk;
}

int CheckGains(const Options& opt) {
  const cladp::ExperimentConfig cfg = LoadConfig(opt);
  const cladp::Experiment exp = cladp::BuildExperiment(cfg);
  double y_under = 0.0, c_under = 0.0;
  if (!cfg.analysis.y_under || !cfg.analysis.c_under) {
    // Certificates come from a simulation when they are not configured.
    const cladp::RunResult result = cladp::RunExperiment(exp);
    y_under = result.summary.min_y_under;
    c_under = result.summary.min_c_value;
  }
  const auto inputs = cladp::BuildGainInputs(cfg, exp, y_under, c_under);
  const auto report = cladp::EvaluateGains(cfg, exp, y_under, c_under);
  Emit(opt, "gain_report.json", cladp::GainReportJson(report, inputs));
  return report.pass ? kExitOk : kExitGainsFail;
}

int Oracle(const Options& opt) {
  const cladp::ExperimentConfig cfg = LoadConfig(opt);
  const cladp::PlantModel model = cladp::BuildPlant(cfg);
  const cladp::CostSpec cost(cfg.cost.Q, cfg.cost.R);
  const cladp::ValueBasis basis = cladp::MakePolynomialBasis(model.n(), {2});
  const cladp::LqrOracle oracle = cladp::MakeLqrOracle(model, cost, basis);
  nlohmann::json j = cladp::OracleJson(oracle);
  j["plant"] = model.name();
  j["care_residual"] =
      cladp::CareResidual(oracle.A, oracle.B, cost.Q(), cost.R(), oracle.P);
  Emit(opt, "oracle.json", j);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concurrent-learning approximate optimal regulation simulator"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Experiment configuration file")
        ->required();
    sub->add_option("--out", opt.out, "Output directory (default ./out)");
    sub->add_option("--seed", opt.seed, "Override the sample-point seed");
  };
  CLI::App* run = app.add_subcommand("run", "Simulate and write trajectory.csv + summary.json");
  CLI::App* check = app.add_subcommand("check-gains", "Evaluate the sufficient gain conditions");
  CLI::App* oracle = app.add_subcommand("oracle", "Print the LQR oracle (P, K, W*)");
  for (CLI::App* sub : {run, check, oracle}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  for (CLI::App* sub : {run, check, oracle})
    if (sub->parsed()) opt.out_given = sub->count("--out") > 0;

  try {
    if (run->parsed()) return Run(opt);
    if (check->parsed()) return CheckGains(opt);
    return Oracle(opt);
  } catch (const cladp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}

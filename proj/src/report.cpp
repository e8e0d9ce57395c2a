#include "cladp/report.hpp"

#include <cmath>

namespace cladp {
namespace {

nlohmann::json FiniteOrNull(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json OptionalJson(const std::optional<double>& v) {
  return v ? FiniteOrNull(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json MatrixJson(const MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json GainReportJson(const GainReport& report,
                              const GainInputs& inputs) {
  nlohmann::json j;
  j["vartheta"] = report.vartheta;
  j["margins"] = {
      {"eta_a2", FiniteOrNull(report.margins[0])},
      {"k_theta", FiniteOrNull(report.margins[1])},
      {"q_under", FiniteOrNull(report.margins[2])},
      {"eta_c2", FiniteOrNull(report.margins[3])},
  };
  j["pass"] = report.pass;
  j["missing_stack_certificate"] = report.missing_stack_certificate;
  j["missing_sample_certificate"] = report.missing_sample_certificate;
  j["inputs"] = {
      {"W_bar", inputs.W_bar},     {"eps_bar", inputs.eps_bar},
      {"eps_prime_bar", inputs.eps_prime_bar},
      {"L_f", inputs.L_f},         {"L_Y", inputs.L_Y},
      {"Z_bar", inputs.Z_bar},     {"zeta1", inputs.zeta1},
      {"zeta2", inputs.zeta2},     {"Gamma_under", inputs.Gamma_under},
      {"nu", inputs.nu},           {"q_under", inputs.q_under},
      {"y_under", inputs.y_under}, {"c_under", inputs.c_under},
  };
  return j;
}

nlohmann::json SummaryJson(const RunSummary& s,
                           const std::optional<nlohmann::json>& gain_report) {
  nlohmann::json j;
  j["final_state_norm"] = FiniteOrNull(s.final_state_norm);
  j["final_Wc_error"] = OptionalJson(s.final_Wc_error);
  j["final_Wa_error"] = OptionalJson(s.final_Wa_error);
  j["final_theta_error"] = FiniteOrNull(s.final_theta_error);
  j["min_y_under"] = s.min_y_under;
  j["min_c_value"] = s.min_c_value;
  j["gamma_bound_violations"] = s.gamma_bound_violations;
  j["gain_report"] = gain_report ? *gain_report : nlohmann::json(nullptr);
  j["final_y_under"] = s.final_y_under;
  j["regressor_bound_violations"] = s.regressor_bound_violations;
  j["sample_rank_failures"] = s.sample_rank_failures;
  j["steps"] = s.steps;
  j["aborted"] = s.aborted;
  if (s.aborted) j["abort_reason"] = s.abort_reason;
  return j;
}

nlohmann::json OracleJson(const LqrOracle& o) {
  nlohmann::json j;
  j["A"] = MatrixJson(o.A);
  j["B"] = MatrixJson(o.B);
  j["P"] = MatrixJson(o.P);
  j["K"] = MatrixJson(o.K);
  j["W_star"] = std::vector<double>(o.W_star.data(), o.W_star.data() + o.W_star.size());
  if (o.P.size() == 1) j["p"] = o.P(0, 0);
  return j;
}

}  // namespace cladp

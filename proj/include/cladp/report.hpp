#pragma once

#include <optional>

#include <json.hpp>

#include "cladp/analysis.hpp"
#include "cladp/oracle.hpp"
#include "cladp/sim.hpp"

namespace cladp {

/// {"vartheta": [7], "margins": {...}, "pass": bool, ...}. Infinite margins
/// (missing certificates) are written as null.
nlohmann::json GainReportJson(const GainReport& report,
                              const GainInputs& inputs);

/// Summary document with keys final_state_norm, final_Wc_error,
/// final_Wa_error, final_theta_error, min_y_under, min_c_value,
/// gamma_bound_violations and gain_report, plus run bookkeeping.
nlohmann::json SummaryJson(const RunSummary& summary,
                           const std::optional<nlohmann::json>& gain_report);

nlohmann::json OracleJson(const LqrOracle& oracle);

nlohmann::json MatrixJson(const MatrixXd& m);

}  // namespace cladp

#pragma once

#include <span>
#include <string>

#include <json.hpp>

#include "distreg/eval.hpp"

namespace distreg {

/// Six significant digits, "%.6g" style; "nan" for NaN.
std::string format_sig6(double value);

/// One row per model: ME x1000, RMSE x100 and R^2, each as mean and std.
std::string results_csv(std::span<const EvalReport> reports);

/// One row per (model, trial) with the selected hyperparameters.
std::string trials_csv(std::span<const EvalReport> reports);

/// Aligned text table in "mean ± std" style, followed by per-phase timings.
std::string results_table(std::span<const EvalReport> reports, bool with_timings = true);

nlohmann::json hyperparams_to_json(const Hyperparams& hyper);
Hyperparams hyperparams_from_json(const nlohmann::json& j);

/// Selected hyperparameters and CV scores per model and trial.
nlohmann::json selections_json(std::span<const EvalReport> reports);

}  // namespace distreg

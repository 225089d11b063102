#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "distreg/eval.hpp"
#include "distreg/regress.hpp"

namespace distreg {

/// Everything a `run` needs. Serializes to the same JSON it is read from, so
/// the resolved config written next to the results reproduces the run.
///
/// {
///   "data":     {"instances": ["src1.csv", ...], "targets": "targets.csv"},
///   "models":   ["lr", "kr", "rdr", "kdr"],
///   "grid":     {"lambda": [...], "sigma_scale": [...], "features": [...]},
///   "protocol": {"test_fraction": 0.33, "trials": 10, "folds": 5, "seed": 0},
///   "output":   "results"
/// }
///
/// Relative paths resolve against the config file's directory.
struct ExperimentConfig {
  std::vector<std::filesystem::path> instances;
  std::filesystem::path targets;
  std::vector<ModelSpec> models;
  HyperGrid grid = HyperGrid::defaults();
  ProtocolOptions protocol;
  std::filesystem::path output = "results";

  static ExperimentConfig from_json(const nlohmann::json& j,
                                    const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

/// Loads one instances file per source plus the shared targets file and aligns
/// the sources on their common bag ids.
MultiSourceDataset load_sources(const std::vector<std::filesystem::path>& instances,
                                const std::filesystem::path& targets);

/// Runs the protocol for every configured model and writes into config.output:
///   results.csv          one row per model (ME x1000, RMSE x100, R^2; mean, std)
///   trials.csv           per-trial metrics and selected hyperparameters
///   selections.json      selected hyperparameters and CV scores
///   config.resolved.json the effective configuration
///   report.txt           aligned table plus wall-clock timings
/// All files except report.txt are byte-identical across reruns.
std::vector<EvalReport> run_experiment(const ExperimentConfig& config);

/// Writes bag_id,y_pred rows in input bag order.
void write_predictions(const MultiSourceDataset& data, const Vector& predictions,
                       const std::filesystem::path& path);

}  // namespace distreg

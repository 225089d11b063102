#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "distreg/regress.hpp"

namespace distreg {

/// Self-describing JSON container: kind, hyperparameters, normalizers,
/// coefficients, the Fourier basis shape and seed (the weights are resampled
/// on load), and the training bags that dual models predict against.
nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& j);

void save_model(const FittedModel& model, const std::filesystem::path& path);
/// Throws ConfigError for unreadable or inconsistent files.
FittedModel load_model(const std::filesystem::path& path);

}  // namespace distreg

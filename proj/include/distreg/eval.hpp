#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "distreg/dataset.hpp"
#include "distreg/regress.hpp"

namespace distreg {

struct Metrics {
  double me = 0.0;    // mean(y_pred - y_true)
  double rmse = 0.0;
  double r2 = 0.0;    // 1 - SS_res / SS_tot
};

/// Throws DataError on length mismatch, empty input, or constant y_true.
Metrics compute_metrics(std::span<const double> y_true, std::span<const double> y_pred);

/// Random partition of 0..bags-1 into `folds` groups whose sizes differ by at
/// most one (the first bags % folds folds get the extra element).
std::vector<std::vector<std::size_t>> kfold_split(std::size_t bags, std::size_t folds,
                                                  std::uint64_t seed);

/// Search space. Bandwidths are multiples of the median-heuristic length-scale
/// of each kernel's training inputs.
struct HyperGrid {
  std::vector<double> lambdas;
  std::vector<double> sigma_scales;
  std::vector<std::size_t> features;

  /// lambda = 10^-6..10^2, sigma scale = 2^-3..2^3, D in {128, 512, 2048}.
  static HyperGrid defaults();
};

struct GridRow {
  Hyperparams hyper;
  double cv_rmse = 0.0;            // mean validation RMSE over folds
  std::vector<double> fold_rmse;
  std::string failure;             // non-empty when the point was excluded

  bool ok() const { return failure.empty(); }
};

struct GridSearchResult {
  Hyperparams best;
  double best_rmse = 0.0;
  std::vector<double> sigma_centers;  // median heuristic per kernel
  std::vector<GridRow> table;
};

/// The grid points for `spec`, with bandwidth multiples resolved against
/// `sigma_centers` and the Fourier basis seed fixed to `basis_seed`.
std::vector<Hyperparams> expand_grid(const ModelSpec& spec, const HyperGrid& grid,
                                     std::span<const double> sigma_centers,
                                     std::uint64_t basis_seed);

/// Median-heuristic length-scale per kernel, measured on the training bags
/// after normalization.
std::vector<double> bandwidth_centers(const ModelSpec& spec, const MultiSourceDataset& train,
                                      std::uint64_t seed);

/// k-fold cross-validation at the bag level over every grid point. Normalizers
/// are refitted on each fold's training bags. Selection minimizes mean RMSE;
/// ties prefer larger lambda, then larger sigma, then smaller D. Points that
/// fail on any fold are excluded; throws only if every point fails.
GridSearchResult grid_search_cv(const MultiSourceDataset& train, const ModelSpec& spec,
                                const HyperGrid& grid, std::size_t folds, std::uint64_t seed);

struct ProtocolOptions {
  double test_fraction = 0.33;
  std::size_t trials = 10;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

enum class DataPhase { kTraining, kEvaluation };

/// Observer for every bag subset the protocol materializes, by global bag index.
struct ProtocolHooks {
  std::function<void(std::size_t trial, DataPhase phase, std::span<const std::size_t> bags)>
      on_access;
};

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> test_bags;
  Hyperparams chosen;
  double cv_rmse = 0.0;
  Metrics test;
  Vector test_predictions;
  double grid_seconds = 0.0;
  double fit_seconds = 0.0;
  double eval_seconds = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single trial
};

MetricSummary summarize(std::span<const double> values);

struct EvalReport {
  ModelSpec model;
  std::vector<TrialResult> trials;
  MetricSummary me;
  MetricSummary rmse;
  MetricSummary r2;
  MetricSummary cv_rmse;
};

/// Recomputes the aggregate fields of `report` from its trials.
void aggregate(EvalReport& report);

/// Repeated hold-out evaluation: per trial (seed + t) split bags into
/// train/test, grid-search on train with k-fold CV, refit the best point on
/// all training bags, and score the held-out bags.
EvalReport run_protocol(const MultiSourceDataset& data, const ModelSpec& spec,
                        const HyperGrid& grid, const ProtocolOptions& options,
                        const ProtocolHooks& hooks = {});

}  // namespace distreg

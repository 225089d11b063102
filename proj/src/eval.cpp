#include "distreg/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "distreg/error.hpp"
#include "distreg/kernel.hpp"
#include "distreg/random.hpp"
#include "distreg/summation.hpp"

namespace distreg {

namespace {

// Sub-stream identifiers below a trial (or search) seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kFoldStream = 2;
constexpr std::uint64_t kMedianStream = 3;
constexpr std::uint64_t kBasisStream = 4;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rmse_of(const Vector& y_true, const Vector& y_pred) {
  const Vector sq = (y_pred - y_true).array().square();
  return std::sqrt(pairwise_sum(as_span(sq)) / static_cast<double>(sq.size()));
}

// ME and RMSE always; R^2 is NaN when the held-out targets are constant
// (for example a single test bag).
Metrics protocol_metrics(const Vector& y_true, const Vector& y_pred) {
  const Vector diff = y_pred - y_true;
  const double n = static_cast<double>(diff.size());
  const Vector sq = diff.array().square();
  const double mean_y = pairwise_sum(as_span(y_true)) / n;
  const Vector dev = (y_true.array() - mean_y).square();
  const double ss_tot = pairwise_sum(as_span(dev));
  Metrics m;
  m.me = pairwise_sum(as_span(diff)) / n;
  m.rmse = std::sqrt(pairwise_sum(as_span(sq)) / n);
  m.r2 = ss_tot > 0.0 ? 1.0 - pairwise_sum(as_span(sq)) / ss_tot
                      : std::numeric_limits<double>::quiet_NaN();
  return m;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& taken) {
  std::vector<bool> used(n, false);
  for (const auto i : taken) used[i] = true;
  std::vector<std::size_t> rest;
  rest.reserve(n - taken.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i]) rest.push_back(i);
  }
  return rest;
}

// True when `a` should win a tie against `b`: larger lambda, then larger
// sigma, then fewer random features.
bool preferred_on_tie(const Hyperparams& a, const Hyperparams& b) {
  if (a.lambda != b.lambda) return a.lambda > b.lambda;
  if (a.sigmas != b.sigmas) {
    return std::lexicographical_compare(b.sigmas.begin(), b.sigmas.end(), a.sigmas.begin(),
                                        a.sigmas.end());
  }
  return a.features < b.features;
}

bool same_design(const Hyperparams& a, const Hyperparams& b) {
  return a.sigmas == b.sigmas && a.features == b.features && a.seed == b.seed;
}

}  // namespace

Metrics compute_metrics(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw DataError("compute_metrics: " + std::to_string(y_true.size()) + " targets but " +
                    std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw DataError("compute_metrics: empty input");
  const Eigen::Map<const Vector> t(y_true.data(), static_cast<Eigen::Index>(y_true.size()));
  const Eigen::Map<const Vector> p(y_pred.data(), static_cast<Eigen::Index>(y_pred.size()));
  const Metrics m = protocol_metrics(t, p);
  if (std::isnan(m.r2)) throw DataError("compute_metrics: R^2 is undefined for constant y_true");
  return m;
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t bags, std::size_t folds,
                                                  std::uint64_t seed) {
  if (folds == 0) throw ConfigError("kfold_split: need at least one fold");
  if (folds > bags) {
    throw DataError("kfold_split: " + std::to_string(folds) + " folds need at least as many bags, got " +
                    std::to_string(bags));
  }
  std::vector<std::size_t> order(bags);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<std::vector<std::size_t>> out(folds);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = bags / folds + (f < bags % folds ? 1 : 0);
    out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                  order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(out[f].begin(), out[f].end());
    pos += size;
  }
  return out;
}

HyperGrid HyperGrid::defaults() {
  HyperGrid grid;
  for (int e = -6; e <= 2; ++e) grid.lambdas.push_back(std::pow(10.0, e));
  for (int e = -3; e <= 3; ++e) grid.sigma_scales.push_back(std::ldexp(1.0, e));
  grid.features = {128, 512, 2048};
  return grid;
}

std::vector<Hyperparams> expand_grid(const ModelSpec& spec, const HyperGrid& grid,
                                     std::span<const double> sigma_centers,
                                     std::uint64_t basis_seed) {
  if (grid.lambdas.empty()) throw ConfigError("grid: no lambda values");
  for (const double l : grid.lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("grid: lambda must be positive and finite");
  }
  const bool bandwidth = uses_bandwidth(spec.kind);
  const bool fourier = uses_fourier_features(spec.kind);
  if (bandwidth && grid.sigma_scales.empty()) throw ConfigError("grid: no sigma_scale values");
  if (bandwidth && sigma_centers.empty()) throw ConfigError("grid: no bandwidth centers");
  if (fourier && grid.features.empty()) throw ConfigError("grid: no features values");

  const std::vector<double> unit_scale{1.0};
  const std::vector<std::size_t> no_features{0};
  const auto& scales = bandwidth ? grid.sigma_scales : unit_scale;
  const auto& features = fourier ? grid.features : no_features;

  std::vector<Hyperparams> points;
  for (const double scale : scales) {
    for (const std::size_t d : features) {
      for (const double lambda : grid.lambdas) {
        Hyperparams h;
        h.lambda = lambda;
        if (bandwidth) {
          for (const double c : sigma_centers) h.sigmas.push_back(c * scale);
        }
        if (fourier) {
          h.features = d;
          h.seed = basis_seed;
        }
        points.push_back(std::move(h));
      }
    }
  }
  return points;
}

std::vector<double> bandwidth_centers(const ModelSpec& spec, const MultiSourceDataset& train,
                                      std::uint64_t seed) {
  if (!uses_bandwidth(spec.kind)) return {};
  const MultiSourceDataset selected = select_inputs(spec, train);
  const auto normalizers = fit_normalizers(selected);
  const auto inputs = kernel_inputs(spec.kind, apply_normalizers(selected, normalizers));
  std::vector<double> centers;
  centers.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    centers.push_back(median_heuristic(inputs[i], 2000, derive_seed(seed, i)));
  }
  return centers;
}

GridSearchResult grid_search_cv(const MultiSourceDataset& train, const ModelSpec& spec,
                                const HyperGrid& grid, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("grid search needs at least 2 folds");
  GridSearchResult result;
  result.sigma_centers =
      bandwidth_centers(spec, train, derive_seed(seed, kMedianStream));
  const auto points =
      expand_grid(spec, grid, result.sigma_centers, derive_seed(seed, kBasisStream));

  // Consecutive points that share a kernel/feature design differ only in lambda.
  std::vector<std::size_t> group_start;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i == 0 || !same_design(points[i], points[i - 1])) group_start.push_back(i);
  }
  group_start.push_back(points.size());
  const std::size_t groups = group_start.size() - 1;

  const auto split = kfold_split(train.size(), folds, derive_seed(seed, kFoldStream));
  const MultiSourceDataset selected = select_inputs(spec, train);

  // Per fold: normalized training and validation views.
  std::vector<MultiSourceDataset> fold_train;
  std::vector<MultiSourceDataset> fold_val;
  fold_train.reserve(folds);
  fold_val.reserve(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const auto train_idx = complement(train.size(), split[f]);
    const MultiSourceDataset tr = selected.subset(train_idx);
    const auto normalizers = fit_normalizers(tr);
    fold_train.push_back(apply_normalizers(tr, normalizers));
    fold_val.push_back(apply_normalizers(selected.subset(split[f]), normalizers));
  }

  std::vector<std::vector<double>> fold_rmse(points.size(), std::vector<double>(folds, 0.0));
  std::vector<std::string> failure(points.size());
  std::vector<std::vector<std::string>> task_failure(points.size(),
                                                     std::vector<std::string>(folds));

  const auto tasks = static_cast<std::ptrdiff_t>(groups * folds);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t task = 0; task < tasks; ++task) {
    const auto g = static_cast<std::size_t>(task) / folds;
    const auto f = static_cast<std::size_t>(task) % folds;
    const std::size_t begin = group_start[g];
    const std::size_t end = group_start[g + 1];
    RidgeDesign design;
    try {
      design = build_design(spec.kind, points[begin], fold_train[f], fold_val[f]);
    } catch (const Error& e) {
      for (std::size_t i = begin; i < end; ++i) task_failure[i][f] = e.what();
      continue;
    }
    for (std::size_t i = begin; i < end; ++i) {
      try {
        const auto sol = solve_design(design, fold_train[f].targets(), points[i].lambda);
        fold_rmse[i][f] = rmse_of(fold_val[f].targets(), predict_design(design, sol));
        if (!std::isfinite(fold_rmse[i][f])) task_failure[i][f] = "non-finite validation RMSE";
      } catch (const Error& e) {
        task_failure[i][f] = e.what();
      }
    }
  }

  result.table.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    GridRow row;
    row.hyper = points[i];
    row.fold_rmse = fold_rmse[i];
    for (std::size_t f = 0; f < folds; ++f) {
      if (!task_failure[i][f].empty()) {
        row.failure = "fold " + std::to_string(f) + ": " + task_failure[i][f];
        break;
      }
    }
    if (row.ok()) {
      row.cv_rmse = pairwise_sum(std::span<const double>(row.fold_rmse)) / static_cast<double>(folds);
    } else {
      row.cv_rmse = std::numeric_limits<double>::quiet_NaN();
    }
    result.table.push_back(std::move(row));
  }

  const GridRow* best = nullptr;
  for (const auto& row : result.table) {
    if (!row.ok()) continue;
    if (best == nullptr || row.cv_rmse < best->cv_rmse ||
        (row.cv_rmse == best->cv_rmse && preferred_on_tie(row.hyper, best->hyper))) {
      best = &row;
    }
  }
  if (best == nullptr) {
    throw IllConditionedError("grid search for " + spec.name() + ": every grid point failed (first: " +
                              result.table.front().failure + ")");
  }
  result.best = best->hyper;
  result.best_rmse = best->cv_rmse;
  return result;
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - s.mean) * (values[i] - s.mean);
    s.std = std::sqrt(pairwise_sum(std::span<const double>(sq)) / (n - 1.0));
  }
  return s;
}

void aggregate(EvalReport& report) {
  std::vector<double> me, rmse, r2, cv;
  for (const auto& t : report.trials) {
    me.push_back(t.test.me);
    rmse.push_back(t.test.rmse);
    r2.push_back(t.test.r2);
    cv.push_back(t.cv_rmse);
  }
  report.me = summarize(me);
  report.rmse = summarize(rmse);
  report.r2 = summarize(r2);
  report.cv_rmse = summarize(cv);
}

EvalReport run_protocol(const MultiSourceDataset& data, const ModelSpec& spec,
                        const HyperGrid& grid, const ProtocolOptions& options,
                        const ProtocolHooks& hooks) {
  if (!(options.test_fraction > 0.0 && options.test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (options.trials < 1) throw ConfigError("trials must be at least 1");
  if (options.folds < 2) throw ConfigError("folds must be at least 2");
  const std::size_t bags = data.size();
  const auto wanted = static_cast<std::size_t>(
      std::llround(options.test_fraction * static_cast<double>(bags)));
  const std::size_t n_test = std::clamp<std::size_t>(wanted, 1, bags > 1 ? bags - 1 : 1);
  if (bags < 2 || bags - n_test < options.folds) {
    throw DataError("insufficient bags: " + std::to_string(bags) + " bags leave " +
                    std::to_string(bags > n_test ? bags - n_test : 0) + " for training, " +
                    std::to_string(options.folds) + " folds need at least that many");
  }

  EvalReport report;
  report.model = spec;
  for (std::size_t t = 0; t < options.trials; ++t) {
    TrialResult trial;
    trial.trial = t;
    trial.seed = options.seed + t;

    std::vector<std::size_t> order(bags);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(trial.seed, kSplitStream));
    rng.shuffle(std::span<std::size_t>(order));
    trial.test_bags.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::sort(trial.test_bags.begin(), trial.test_bags.end());
    const auto train_idx = complement(bags, trial.test_bags);

    if (hooks.on_access) hooks.on_access(t, DataPhase::kTraining, train_idx);
    const MultiSourceDataset train = data.subset(train_idx);

    auto start = Clock::now();
    const auto search = grid_search_cv(train, spec, grid, options.folds, trial.seed);
    trial.grid_seconds = seconds_since(start);
    trial.chosen = search.best;
    trial.cv_rmse = search.best_rmse;

    start = Clock::now();
    const FittedModel model = fit(spec, train, trial.chosen);
    trial.fit_seconds = seconds_since(start);

    if (hooks.on_access) hooks.on_access(t, DataPhase::kEvaluation, trial.test_bags);
    start = Clock::now();
    const MultiSourceDataset test = data.subset(trial.test_bags);
    trial.test_predictions = predict(model, test);
    trial.test = protocol_metrics(test.targets(), trial.test_predictions);
    trial.eval_seconds = seconds_since(start);

    report.trials.push_back(std::move(trial));
  }
  aggregate(report);
  return report;
}

}  // namespace distreg

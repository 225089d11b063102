// Randomized scenarios shared by the unit tests and the acceptance runner.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "distreg/regress.hpp"
#include "oracles.hpp"

namespace scenario {

inline const std::vector<distreg::ModelKind>& all_kinds() {
  using distreg::ModelKind;
  static const std::vector<ModelKind> kinds{
      ModelKind::kLR,        ModelKind::kKR,        ModelKind::kKDR,
      ModelKind::kRDR,       ModelKind::kMDR,       ModelKind::kStackedLR,
      ModelKind::kStackedKR, ModelKind::kStackedRDR, ModelKind::kStackedKDR};
  return kinds;
}

/// Two aligned sources with their own d and bag sizes.
inline distreg::MultiSourceDataset random_multisource(std::mt19937_64& gen, std::size_t bags) {
  auto first = oracle::random_dataset(gen, bags, 6, 2);
  auto other = oracle::random_dataset(gen, bags, 5, 3);
  std::vector<distreg::Bag> second;
  for (std::size_t b = 0; b < bags; ++b) second.push_back(distreg::Bag{first.bag(b).id, other.bag(b).instances});
  return distreg::MultiSourceDataset({first, distreg::BagDataset(second, first.targets())});
}

inline distreg::Hyperparams default_hyper(distreg::ModelKind kind) {
  distreg::Hyperparams h;
  h.lambda = 1e-2;
  if (kind == distreg::ModelKind::kMDR) {
    h.sigmas = {1.0, 1.3};
  } else if (distreg::uses_bandwidth(kind)) {
    h.sigmas = {1.1};
  }
  if (distreg::uses_fourier_features(kind)) {
    h.features = 256;
    h.seed = 7;
  }
  return h;
}

inline distreg::MultiSourceDataset map_bags(const distreg::MultiSourceDataset& data,
                                            distreg::Matrix (*f)(const distreg::Matrix&)) {
  std::vector<distreg::BagDataset> parts;
  for (const auto& s : data.sources()) {
    std::vector<distreg::Bag> bags;
    for (const auto& b : s.bags()) bags.push_back(distreg::Bag{b.id, f(b.instances)});
    parts.emplace_back(std::move(bags), s.targets());
  }
  return distreg::MultiSourceDataset(std::move(parts));
}

inline distreg::Matrix reverse_rows(const distreg::Matrix& m) { return m.colwise().reverse(); }

inline distreg::Matrix duplicate_rows(const distreg::Matrix& m) {
  distreg::Matrix d(2 * m.rows(), m.cols());
  d << m, m;
  return d;
}

struct InvarianceResult {
  double permutation = 0.0;   // max |change| when rows within every bag are reversed
  double duplication = 0.0;   // max |change| when every test bag's rows are duplicated
  double target_shift = 0.0;  // max |pred(y + c) - pred(y) - c|
};

/// Fits `kind` end to end (normalization included) on a random train/test
/// pair and measures the three invariances.
inline InvarianceResult check_invariances(distreg::ModelKind kind, std::mt19937_64& gen) {
  using namespace distreg;
  std::uniform_int_distribution<std::size_t> count(4, 12);
  const MultiSourceDataset train = random_multisource(gen, count(gen));
  const MultiSourceDataset test = random_multisource(gen, count(gen));
  const ModelSpec spec{kind, 0};
  const Hyperparams h = default_hyper(kind);

  const Vector base = predict(fit(spec, train, h), test);
  InvarianceResult r;

  const Vector perm = predict(fit(spec, map_bags(train, reverse_rows), h), map_bags(test, reverse_rows));
  r.permutation = (perm - base).cwiseAbs().maxCoeff();

  const Vector dup = predict(fit(spec, train, h), map_bags(test, duplicate_rows));
  r.duplication = (dup - base).cwiseAbs().maxCoeff();

  const double c = std::uniform_real_distribution<double>(-5.0, 5.0)(gen);
  const Vector shifted_y = train.targets().array() + c;
  const Vector shifted = predict(fit(spec, train.with_targets(shifted_y), h), test);
  r.target_shift = (shifted.array() - c - base.array()).cwiseAbs().maxCoeff();
  return r;
}

}  // namespace scenario

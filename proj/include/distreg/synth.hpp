#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "distreg/dataset.hpp"

namespace distreg::synth {

/// Instances ~ N(0, s_b^2 I), target y_b = s_b with s_b ~ U[min_scale, max_scale].
/// Bag means carry no information about the target.
struct VarianceTaskParams {
  std::size_t bags = 120;
  std::size_t instances = 50;
  std::size_t dim = 3;
  double min_scale = 0.5;
  double max_scale = 2.0;
};
BagDataset variance_task(const VarianceTaskParams& params, std::uint64_t seed);

/// Instances ~ N(m_b, I) with m_b ~ N(0, I); y_b = a . mean(X_b) + c + noise.
/// The coefficients are drawn from the seed.
struct MeanTaskParams {
  std::size_t bags = 100;
  std::size_t instances = 30;
  std::size_t dim = 3;
  double noise = 0.1;
};
struct MeanTask {
  BagDataset data;
  Vector coefficients;
  double offset = 0.0;
};
MeanTask mean_task(const MeanTaskParams& params, std::uint64_t seed);

/// Two sources with their own dimensionality and per-bag instance counts:
/// source f has instances ~ N(0, s_f^2 I) with s_f ~ U[min_scale, max_scale],
/// and y_b = s_1 + s_2.
struct MultiSourceTaskParams {
  std::size_t bags = 120;
  std::size_t dim_first = 2;
  std::size_t dim_second = 3;
  std::size_t min_instances_first = 20;
  std::size_t max_instances_first = 40;
  std::size_t min_instances_second = 30;
  std::size_t max_instances_second = 50;
  double min_scale = 0.5;
  double max_scale = 2.0;
};
MultiSourceDataset multisource_task(const MultiSourceTaskParams& params, std::uint64_t seed);

/// Two-sample scenarios:
///   a: N(0, I) vs N(shift, I)
///   b: N(0, I) vs N(0, variance_ratio I)
///   c: N(0, I) vs Laplace with unit variance per coordinate
///   d: scenario b mapped through x -> x^2
struct GalleryParams {
  std::size_t samples = 2000;
  std::size_t dim = 1;
  double shift = 3.0;
  double variance_ratio = 4.0;
};
struct TwoSampleScenario {
  std::string name;
  std::string description;
  Matrix x;
  Matrix y;
};
std::vector<TwoSampleScenario> two_sample_gallery(const GalleryParams& params, std::uint64_t seed);

}  // namespace distreg::synth

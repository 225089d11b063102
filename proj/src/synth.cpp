#include "distreg/synth.hpp"

#include <cmath>
#include <cstdio>

#include "distreg/error.hpp"
#include "distreg/random.hpp"

namespace distreg::synth {

namespace {

// Stream for draws that are not tied to a single bag.
constexpr std::uint64_t kSharedStream = 0xFFFFFFFFFFFFFFFFULL;

std::string bag_id(std::size_t b) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "bag%04zu", b);
  return buf;
}

Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

void require(bool ok, const char* message) {
  if (!ok) throw ConfigError(message);
}

void check_scales(double lo, double hi) {
  require(lo > 0.0 && hi >= lo && std::isfinite(hi), "scale range must satisfy 0 < min <= max");
}

}  // namespace

BagDataset variance_task(const VarianceTaskParams& params, std::uint64_t seed) {
  require(params.bags >= 1 && params.instances >= 1 && params.dim >= 1,
          "variance-task needs bags, instances and dim >= 1");
  check_scales(params.min_scale, params.max_scale);
  std::vector<Bag> bags;
  Vector targets(static_cast<Eigen::Index>(params.bags));
  for (std::size_t b = 0; b < params.bags; ++b) {
    Rng rng(derive_seed(seed, b));
    const double s = rng.uniform(params.min_scale, params.max_scale);
    bags.push_back(Bag{bag_id(b), gaussian(rng, params.instances, params.dim, s)});
    targets(static_cast<Eigen::Index>(b)) = s;
  }
  return BagDataset(std::move(bags), std::move(targets));
}

MeanTask mean_task(const MeanTaskParams& params, std::uint64_t seed) {
  require(params.bags >= 1 && params.instances >= 1 && params.dim >= 1,
          "mean-task needs bags, instances and dim >= 1");
  require(params.noise >= 0.0, "mean-task noise must be >= 0");
  Rng shared(derive_seed(seed, kSharedStream));
  Vector a(static_cast<Eigen::Index>(params.dim));
  for (Eigen::Index j = 0; j < a.size(); ++j) a(j) = shared.normal();
  const double c = shared.normal();

  std::vector<Bag> bags;
  Vector targets(static_cast<Eigen::Index>(params.bags));
  for (std::size_t b = 0; b < params.bags; ++b) {
    Rng rng(derive_seed(seed, b));
    Eigen::RowVectorXd center(a.size());
    for (Eigen::Index j = 0; j < center.size(); ++j) center(j) = rng.normal();
    Matrix x = gaussian(rng, params.instances, params.dim, 1.0);
    x.rowwise() += center;
    const double y = x.colwise().mean().dot(a.transpose()) + c + params.noise * rng.normal();
    targets(static_cast<Eigen::Index>(b)) = y;
    bags.push_back(Bag{bag_id(b), std::move(x)});
  }
  return MeanTask{BagDataset(std::move(bags), std::move(targets)), std::move(a), c};
}

MultiSourceDataset multisource_task(const MultiSourceTaskParams& params, std::uint64_t seed) {
  require(params.bags >= 1 && params.dim_first >= 1 && params.dim_second >= 1,
          "multisource-task needs bags and dims >= 1");
  require(params.min_instances_first >= 1 && params.max_instances_first >= params.min_instances_first &&
              params.min_instances_second >= 1 &&
              params.max_instances_second >= params.min_instances_second,
          "multisource-task instance ranges must satisfy 1 <= min <= max");
  check_scales(params.min_scale, params.max_scale);

  std::vector<Bag> first, second;
  Vector targets(static_cast<Eigen::Index>(params.bags));
  for (std::size_t b = 0; b < params.bags; ++b) {
    Rng rng(derive_seed(seed, b));
    const double s1 = rng.uniform(params.min_scale, params.max_scale);
    const double s2 = rng.uniform(params.min_scale, params.max_scale);
    const auto n1 = params.min_instances_first +
                    rng.below(params.max_instances_first - params.min_instances_first + 1);
    const auto n2 = params.min_instances_second +
                    rng.below(params.max_instances_second - params.min_instances_second + 1);
    first.push_back(Bag{bag_id(b), gaussian(rng, n1, params.dim_first, s1)});
    second.push_back(Bag{bag_id(b), gaussian(rng, n2, params.dim_second, s2)});
    targets(static_cast<Eigen::Index>(b)) = s1 + s2;
  }
  std::vector<BagDataset> sources;
  sources.emplace_back(std::move(first), targets);
  sources.emplace_back(std::move(second), targets);
  return MultiSourceDataset(std::move(sources));
}

std::vector<TwoSampleScenario> two_sample_gallery(const GalleryParams& params, std::uint64_t seed) {
  require(params.samples >= 1 && params.dim >= 1, "gallery needs samples and dim >= 1");
  require(params.variance_ratio > 0.0, "gallery variance_ratio must be > 0");
  const std::size_t n = params.samples;
  const std::size_t d = params.dim;
  std::vector<TwoSampleScenario> out;

  {
    Rng rng(derive_seed(seed, 0));
    Matrix x = gaussian(rng, n, d, 1.0);
    Matrix y = gaussian(rng, n, d, 1.0);
    y.array() += params.shift;
    out.push_back({"a", "N(0, I) vs N(shift, I): different means", std::move(x), std::move(y)});
  }
  {
    Rng rng(derive_seed(seed, 1));
    Matrix x = gaussian(rng, n, d, 1.0);
    Matrix y = gaussian(rng, n, d, std::sqrt(params.variance_ratio));
    out.push_back({"b", "N(0, I) vs N(0, ratio I): equal means, different variances", std::move(x),
                   std::move(y)});
  }
  {
    Rng rng(derive_seed(seed, 2));
    Matrix x = gaussian(rng, n, d, 1.0);
    Matrix y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    const double scale = 1.0 / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      for (Eigen::Index j = 0; j < y.cols(); ++j) y(i, j) = rng.laplace(scale);
    }
    out.push_back({"c", "N(0, I) vs Laplace: same mean and variance, different shape", std::move(x),
                   std::move(y)});
  }
  {
    Matrix x = out[1].x.array().square();
    Matrix y = out[1].y.array().square();
    out.push_back({"d", "scenario b under x -> x^2: the variance gap becomes a mean gap",
                   std::move(x), std::move(y)});
  }
  return out;
}

}  // namespace distreg::synth

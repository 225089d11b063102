#include "distreg/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "distreg/error.hpp"
#include "distreg/random.hpp"
#include "distreg/summation.hpp"

namespace distreg {

namespace {

void check_dims(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

inline double squared_distance(const double* x, const double* y, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double diff = x[k] - y[k];
    s += diff * diff;
  }
  return s;
}

}  // namespace

RbfParams::RbfParams(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("RBF sigma must be positive and finite, got " + std::to_string(sigma));
  }
}

double rbf_kernel(std::span<const double> x, std::span<const double> x_prime,
                  const RbfParams& params) {
  check_dims(x.size(), x_prime.size(), "rbf_kernel");
  const double sq =
      squared_distance(x.data(), x_prime.data(), static_cast<Eigen::Index>(x.size()));
  return std::exp(-sq * params.gamma());
}

Matrix cross_gram(const Matrix& a, const Matrix& b, const RbfParams& params) {
  check_dims(static_cast<std::size_t>(a.cols()), static_cast<std::size_t>(b.cols()), "cross_gram");
  const double gamma = params.gamma();
  const Eigen::Index d = a.cols();
  Matrix out(a.rows(), b.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double* x = a.data() + i * d;
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      out(i, j) = std::exp(-squared_distance(x, b.data() + j * d, d) * gamma);
    }
  }
  return out;
}

double mean_embedding_dot(const Matrix& a, const Matrix& b, const RbfParams& params) {
  check_dims(static_cast<std::size_t>(a.cols()), static_cast<std::size_t>(b.cols()),
             "bag kernel");
  const double gamma = params.gamma();
  const Eigen::Index d = a.cols();
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();

  std::vector<double> row_sums(static_cast<std::size_t>(n));
  std::vector<double> tile(static_cast<std::size_t>(std::min(n, kGramTileRows) * m));
  for (Eigen::Index i0 = 0; i0 < n; i0 += kGramTileRows) {
    const Eigen::Index rows = std::min(kGramTileRows, n - i0);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double* x = a.data() + (i0 + r) * d;
      double* out = tile.data() + r * m;
      for (Eigen::Index j = 0; j < m; ++j) {
        out[j] = std::exp(-squared_distance(x, b.data() + j * d, d) * gamma);
      }
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      row_sums[static_cast<std::size_t>(i0 + r)] =
          pairwise_sum({tile.data() + r * m, static_cast<std::size_t>(m)});
    }
  }
  return pairwise_sum(row_sums) / (static_cast<double>(n) * static_cast<double>(m));
}

Matrix bag_gram(const BagDataset& data, const RbfParams& params) {
  const auto count = static_cast<Eigen::Index>(data.size());
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(count * (count + 1) / 2));
  for (Eigen::Index b = 0; b < count; ++b) {
    for (Eigen::Index c = b; c < count; ++c) pairs.emplace_back(b, c);
  }
  Matrix gram(count, count);
  const auto n_pairs = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t p = 0; p < n_pairs; ++p) {
    const auto [b, c] = pairs[static_cast<std::size_t>(p)];
    const double v = mean_embedding_dot(data.bag(static_cast<std::size_t>(b)).instances,
                                        data.bag(static_cast<std::size_t>(c)).instances, params);
    gram(b, c) = v;
    gram(c, b) = v;
  }
  return gram;
}

Matrix cross_bag_gram(const BagDataset& test, const BagDataset& train, const RbfParams& params) {
  check_dims(test.dim(), train.dim(), "cross_bag_gram");
  const auto rows = static_cast<Eigen::Index>(test.size());
  const auto cols = static_cast<Eigen::Index>(train.size());
  Matrix out(rows, cols);
  const std::ptrdiff_t total = rows * cols;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t p = 0; p < total; ++p) {
    const Eigen::Index t = p / cols;
    const Eigen::Index b = p % cols;
    out(t, b) = mean_embedding_dot(test.bag(static_cast<std::size_t>(t)).instances,
                                   train.bag(static_cast<std::size_t>(b)).instances, params);
  }
  return out;
}

namespace {

void check_param_count(std::size_t sources, std::size_t params) {
  if (sources != params) {
    throw ConfigError("multisource kernel needs one RBF parameter per source: " +
                      std::to_string(sources) + " sources, " + std::to_string(params) +
                      " parameters");
  }
}

}  // namespace

Matrix multisource_bag_gram(const MultiSourceDataset& data, std::span<const RbfParams> params) {
  check_param_count(data.num_sources(), params.size());
  Matrix gram = bag_gram(data.source(0), params[0]);
  for (std::size_t f = 1; f < data.num_sources(); ++f) gram += bag_gram(data.source(f), params[f]);
  return gram;
}

Matrix multisource_cross_bag_gram(const MultiSourceDataset& test, const MultiSourceDataset& train,
                                  std::span<const RbfParams> params) {
  check_param_count(train.num_sources(), params.size());
  check_param_count(test.num_sources(), params.size());
  Matrix out = cross_bag_gram(test.source(0), train.source(0), params[0]);
  for (std::size_t f = 1; f < train.num_sources(); ++f) {
    out += cross_bag_gram(test.source(f), train.source(f), params[f]);
  }
  return out;
}

namespace {

double clamp_round_off(double value) {
  return (value < 0.0 && value >= -1e-12) ? 0.0 : value;
}

}  // namespace

double mmd_squared(const Matrix& sample_x, const Matrix& sample_y, const RbfParams& params) {
  if (sample_x.rows() == 0 || sample_y.rows() == 0) throw DataError("mmd_squared: empty sample");
  check_dims(static_cast<std::size_t>(sample_x.cols()), static_cast<std::size_t>(sample_y.cols()),
             "mmd_squared");
  const double kxx = mean_embedding_dot(sample_x, sample_x, params);
  const double kyy = mean_embedding_dot(sample_y, sample_y, params);
  const double kxy = mean_embedding_dot(sample_x, sample_y, params);
  return clamp_round_off(kxx + kyy - 2.0 * kxy);
}

double median_heuristic(const Matrix& pooled, std::size_t max_points, std::uint64_t seed) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(pooled.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  if (max_points > 0 && rows.size() > max_points) {
    Rng rng(seed);
    rng.shuffle(std::span<Eigen::Index>(rows));
    rows.resize(max_points);
    std::sort(rows.begin(), rows.end());
  }
  const Eigen::Index d = pooled.cols();
  std::vector<double> dist;
  dist.reserve(rows.size() * (rows.size() - (rows.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      dist.push_back(std::sqrt(squared_distance(pooled.data() + rows[i] * d,
                                                pooled.data() + rows[j] * d, d)));
    }
  }
  if (dist.empty()) return 1.0;
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double median = dist[mid];
  if (dist.size() % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (lower + median);
  }
  return median > 0.0 ? median : 1.0;
}

namespace {

/// Squared MMD for a labelling of the pooled sample, from its full Gram matrix.
double labelled_mmd(const Matrix& gram, const std::vector<char>& in_x, double nx, double ny) {
  const Eigen::Index total = gram.rows();
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (Eigen::Index i = 0; i < total; ++i) {
    const double* row = gram.data() + i * total;
    double rx = 0.0;
    double ry = 0.0;
    for (Eigen::Index j = 0; j < total; ++j) {
      if (in_x[static_cast<std::size_t>(j)]) {
        rx += row[j];
      } else {
        ry += row[j];
      }
    }
    if (in_x[static_cast<std::size_t>(i)]) {
      sxx += rx;
      sxy += ry;
    } else {
      syy += ry;
    }
  }
  return sxx / (nx * nx) + syy / (ny * ny) - 2.0 * sxy / (nx * ny);
}

double empirical_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

}  // namespace

MmdTestResult mmd_permutation_test(const Matrix& sample_x, const Matrix& sample_y,
                                   const RbfParams& params, std::size_t permutations,
                                   std::uint64_t seed) {
  MmdTestResult result;
  result.sigma = params.sigma();
  result.statistic = mmd_squared(sample_x, sample_y, params);

  const Eigen::Index nx = sample_x.rows();
  const Eigen::Index ny = sample_y.rows();
  Matrix pooled(nx + ny, sample_x.cols());
  pooled.topRows(nx) = sample_x;
  pooled.bottomRows(ny) = sample_y;
  const Matrix gram = cross_gram(pooled, pooled, params);

  std::vector<char> labels(static_cast<std::size_t>(nx + ny), 0);
  std::fill(labels.begin(), labels.begin() + nx, 1);
  const double observed =
      labelled_mmd(gram, labels, static_cast<double>(nx), static_cast<double>(ny));

  Rng rng(seed);
  std::size_t at_least = 0;
  result.null_statistics.reserve(permutations);
  for (std::size_t p = 0; p < permutations; ++p) {
    rng.shuffle(std::span<char>(labels));
    const double stat =
        labelled_mmd(gram, labels, static_cast<double>(nx), static_cast<double>(ny));
    result.null_statistics.push_back(stat);
    if (stat >= observed) ++at_least;
  }
  std::vector<double> sorted = result.null_statistics;
  std::sort(sorted.begin(), sorted.end());
  result.null_q95 = empirical_quantile(sorted, 0.95);
  result.null_q99 = empirical_quantile(sorted, 0.99);
  result.p_value =
      static_cast<double>(1 + at_least) / static_cast<double>(1 + permutations);
  return result;
}

}  // namespace distreg

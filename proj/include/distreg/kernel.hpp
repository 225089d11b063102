#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "distreg/dataset.hpp"
#include "distreg/linalg.hpp"

namespace distreg {

/// RBF kernel length-scale. The kernel is k(x, x') = exp(-|x - x'|^2 / (2 sigma^2)),
/// i.e. gamma = 1 / (2 sigma^2) in the exp(-gamma |x - x'|^2) form.
class RbfParams {
 public:
  explicit RbfParams(double sigma);

  double sigma() const { return sigma_; }
  double gamma() const { return 1.0 / (2.0 * sigma_ * sigma_); }

 private:
  double sigma_;
};

/// Rows per tile when assembling bag-level kernel sums. Only one tile of
/// instance kernel values is alive at a time per worker.
inline constexpr Eigen::Index kGramTileRows = 64;

double rbf_kernel(std::span<const double> x, std::span<const double> x_prime,
                  const RbfParams& params);

/// Instance-level Gram block: entry (i, j) = k(a_i, b_j).
Matrix cross_gram(const Matrix& a, const Matrix& b, const RbfParams& params);

/// Dot product of the empirical mean embeddings of two instance sets:
/// (1 / (n m)) sum_i sum_j k(a_i, b_j), accumulated with pairwise summation.
double mean_embedding_dot(const Matrix& a, const Matrix& b, const RbfParams& params);

inline double bag_mean_kernel_entry(const Bag& bag, const Bag& other, const RbfParams& params) {
  return mean_embedding_dot(bag.instances, other.instances, params);
}

/// B x B matrix of mean-embedding dot products. Exactly symmetric: only the
/// upper triangle is computed.
Matrix bag_gram(const BagDataset& data, const RbfParams& params);

/// B_test x B_train matrix of mean-embedding dot products.
Matrix cross_bag_gram(const BagDataset& test, const BagDataset& train, const RbfParams& params);

/// Sum over sources of per-source bag Gram matrices (direct-sum embedding).
Matrix multisource_bag_gram(const MultiSourceDataset& data, std::span<const RbfParams> params);

Matrix multisource_cross_bag_gram(const MultiSourceDataset& test, const MultiSourceDataset& train,
                                  std::span<const RbfParams> params);

/// Biased (V-statistic) squared MMD between two samples. Small negative
/// round-off (>= -1e-12) is clamped to zero.
double mmd_squared(const Matrix& sample_x, const Matrix& sample_y, const RbfParams& params);

/// Median pairwise Euclidean distance over at most `max_points` rows
/// (a seeded subsample when there are more). Falls back to 1 when the
/// median is zero.
double median_heuristic(const Matrix& pooled, std::size_t max_points = 2000,
                        std::uint64_t seed = 0);

struct MmdTestResult {
  double statistic = 0.0;
  double null_q95 = 0.0;
  double null_q99 = 0.0;
  double p_value = 1.0;
  double sigma = 0.0;
  std::vector<double> null_statistics;
};

/// Permutation two-sample test on mmd_squared. The p-value is
/// (1 + #{null >= observed}) / (1 + permutations).
MmdTestResult mmd_permutation_test(const Matrix& sample_x, const Matrix& sample_y,
                                   const RbfParams& params, std::size_t permutations,
                                   std::uint64_t seed);

}  // namespace distreg

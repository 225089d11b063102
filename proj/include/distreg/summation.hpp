#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "distreg/linalg.hpp"

namespace distreg {

/// Pairwise (cascade) summation; error grows as O(log n) rather than O(n).
double pairwise_sum(std::span<const double> values);

/// Streaming pairwise summation of equally sized vectors.
///
/// Partial sums are kept on a binary-counter stack, so adding n vectors costs
/// O(log n) stored vectors and combines them in the same tree order as
/// pairwise_sum would for scalars.
class PairwiseVectorSum {
 public:
  explicit PairwiseVectorSum(Eigen::Index dim);

  void add(const Vector& v);
  Vector total() const;
  std::size_t count() const { return count_; }

 private:
  struct Partial {
    Vector sum;
    std::size_t weight;
  };
  Eigen::Index dim_;
  std::vector<Partial> stack_;
  std::size_t count_ = 0;
};

}  // namespace distreg

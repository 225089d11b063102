#include "distreg/summation.hpp"

namespace distreg {

namespace {

constexpr std::size_t kPairwiseBlock = 8;

double pairwise_sum_impl(const double* values, std::size_t n) {
  if (n <= kPairwiseBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(values, half) + pairwise_sum_impl(values + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_impl(values.data(), values.size());
}

PairwiseVectorSum::PairwiseVectorSum(Eigen::Index dim) : dim_(dim) {}

void PairwiseVectorSum::add(const Vector& v) {
  Partial p{v, 1};
  while (!stack_.empty() && stack_.back().weight == p.weight) {
    p.sum = stack_.back().sum + p.sum;
    p.weight *= 2;
    stack_.pop_back();
  }
  stack_.push_back(std::move(p));
  ++count_;
}

Vector PairwiseVectorSum::total() const {
  if (stack_.empty()) return Vector::Zero(dim_);
  // Fold from the smallest partial upwards.
  Vector s = stack_.back().sum;
  for (auto it = stack_.rbegin() + 1; it != stack_.rend(); ++it) s = it->sum + s;
  return s;
}

}  // namespace distreg

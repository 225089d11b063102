#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "distreg/dataset.hpp"
#include "distreg/linalg.hpp"

namespace distreg {

/// Random Fourier basis for the RBF kernel: D frequency vectors w_i ~ N(0, sigma^-2 I).
///
/// Column i is drawn from its own stream derive_seed(seed, i), so the basis
/// is a pure function of (seed, d, D, sigma) no matter how sampling is
/// scheduled.
class FourierBasis {
 public:
  FourierBasis(Matrix weights, double sigma, std::uint64_t seed);

  const Matrix& weights() const { return weights_; }
  double sigma() const { return sigma_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t input_dim() const { return static_cast<std::size_t>(weights_.rows()); }
  std::size_t num_frequencies() const { return static_cast<std::size_t>(weights_.cols()); }
  /// Length of a feature vector: one (cos, sin) pair per frequency.
  std::size_t feature_dim() const { return 2 * num_frequencies(); }

 private:
  Matrix weights_;  // d x D
  double sigma_;
  std::uint64_t seed_;
};

FourierBasis sample_basis(std::size_t dim, std::size_t num_frequencies, double sigma,
                          std::uint64_t seed);

/// z(x) = D^{-1/2} [cos(w_1.x), sin(w_1.x), ..., cos(w_D.x), sin(w_D.x)],
/// so |z(x)| = 1 and z(x).z(x') estimates k(x, x').
Vector feature_map(std::span<const double> x, const FourierBasis& basis);

/// Mean of feature_map over the rows of `instances` (pairwise accumulated).
Vector mean_features(const Matrix& instances, const FourierBasis& basis);

inline Vector bag_mean_features(const Bag& bag, const FourierBasis& basis) {
  return mean_features(bag.instances, basis);
}

/// B x 2D matrix whose rows are the bag mean feature vectors.
Matrix bag_feature_matrix(const BagDataset& data, const FourierBasis& basis);

}  // namespace distreg

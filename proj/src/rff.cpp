#include "distreg/rff.hpp"

#include <cmath>
#include <string>

#include "distreg/error.hpp"
#include "distreg/random.hpp"
#include "distreg/summation.hpp"

namespace distreg {

FourierBasis::FourierBasis(Matrix weights, double sigma, std::uint64_t seed)
    : weights_(std::move(weights)), sigma_(sigma), seed_(seed) {
  if (weights_.rows() < 1 || weights_.cols() < 1) {
    throw ConfigError("Fourier basis needs d >= 1 and D >= 1");
  }
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
    throw ConfigError("Fourier basis sigma must be positive and finite");
  }
  if (!weights_.allFinite()) throw ConfigError("Fourier basis has non-finite weights");
}

FourierBasis sample_basis(std::size_t dim, std::size_t num_frequencies, double sigma,
                          std::uint64_t seed) {
  if (dim < 1 || num_frequencies < 1) throw ConfigError("sample_basis: d and D must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("sample_basis: sigma must be positive and finite");
  }
  const auto d = static_cast<Eigen::Index>(dim);
  const auto big_d = static_cast<Eigen::Index>(num_frequencies);
  Matrix weights(d, big_d);
  const double inv_sigma = 1.0 / sigma;
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < big_d; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    for (Eigen::Index r = 0; r < d; ++r) weights(r, i) = rng.normal() * inv_sigma;
  }
  return FourierBasis(std::move(weights), sigma, seed);
}

namespace {

void check_dim(std::size_t got, const FourierBasis& basis) {
  if (got != basis.input_dim()) {
    throw DimensionError("Fourier basis expects d=" + std::to_string(basis.input_dim()) +
                         ", got d=" + std::to_string(got));
  }
}

/// Writes z(x) into `out` (length 2D).
void map_into(const double* x, const FourierBasis& basis, double* out) {
  const Matrix& w = basis.weights();
  const Eigen::Index d = w.rows();
  const Eigen::Index big_d = w.cols();
  const double scale = 1.0 / std::sqrt(static_cast<double>(big_d));
  for (Eigen::Index i = 0; i < big_d; ++i) {
    double proj = 0.0;
    for (Eigen::Index r = 0; r < d; ++r) proj += x[r] * w(r, i);
    out[2 * i] = std::cos(proj) * scale;
    out[2 * i + 1] = std::sin(proj) * scale;
  }
}

}  // namespace

Vector feature_map(std::span<const double> x, const FourierBasis& basis) {
  check_dim(x.size(), basis);
  Vector z(static_cast<Eigen::Index>(basis.feature_dim()));
  map_into(x.data(), basis, z.data());
  return z;
}

Vector mean_features(const Matrix& instances, const FourierBasis& basis) {
  check_dim(static_cast<std::size_t>(instances.cols()), basis);
  if (instances.rows() == 0) throw DataError("mean_features: empty bag");
  const auto p = static_cast<Eigen::Index>(basis.feature_dim());
  PairwiseVectorSum sum(p);
  Vector z(p);
  for (Eigen::Index i = 0; i < instances.rows(); ++i) {
    map_into(instances.data() + i * instances.cols(), basis, z.data());
    sum.add(z);
  }
  return sum.total() / static_cast<double>(instances.rows());
}

Matrix bag_feature_matrix(const BagDataset& data, const FourierBasis& basis) {
  check_dim(data.dim(), basis);
  const auto bags = static_cast<Eigen::Index>(data.size());
  Matrix z(bags, static_cast<Eigen::Index>(basis.feature_dim()));
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index b = 0; b < bags; ++b) {
    z.row(b) = mean_features(data.bag(static_cast<std::size_t>(b)).instances, basis).transpose();
  }
  return z;
}

}  // namespace distreg

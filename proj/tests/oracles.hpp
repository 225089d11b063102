// Independent reference implementations for tests. Nothing here calls into
// the library's numerical code: kernels are scalar loops, linear systems use
// plain Gaussian elimination, and random data comes from std::mt19937_64.
#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "distreg/dataset.hpp"

namespace oracle {

using Rows = std::vector<std::vector<double>>;

inline double rbf(const std::vector<double>& x, const std::vector<double>& y, double sigma) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) d2 += (x[k] - y[k]) * (x[k] - y[k]);
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

inline Rows rows_of(const distreg::Matrix& m) {
  Rows out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  }
  return out;
}

/// (1 / (n m)) sum_i sum_j k(a_i, b_j) by a plain double loop.
inline double bag_kernel(const Rows& a, const Rows& b, double sigma) {
  double s = 0.0;
  for (const auto& x : a) {
    for (const auto& y : b) s += rbf(x, y, sigma);
  }
  return s / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

inline std::vector<Rows> bags_of(const distreg::BagDataset& d) {
  std::vector<Rows> out;
  for (const auto& b : d.bags()) out.push_back(rows_of(b.instances));
  return out;
}

inline std::vector<std::vector<double>> bag_gram(const std::vector<Rows>& test,
                                                 const std::vector<Rows>& train, double sigma) {
  std::vector<std::vector<double>> g(test.size(), std::vector<double>(train.size()));
  for (std::size_t i = 0; i < test.size(); ++i) {
    for (std::size_t j = 0; j < train.size(); ++j) g[i][j] = bag_kernel(test[i], train[j], sigma);
  }
  return g;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Instance-level kernel ridge regression with an intercept equal to the
/// training target mean: alpha = (K + lambda I)^{-1} (y - mean(y)).
inline std::vector<double> krr_predict(const Rows& train_x, const std::vector<double>& y,
                                       const Rows& test_x, double sigma, double lambda) {
  const std::size_t n = train_x.size();
  double mean = 0.0;
  for (const double v : y) mean += v;
  mean /= static_cast<double>(n);
  std::vector<std::vector<double>> k(n, std::vector<double>(n));
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i][j] = rbf(train_x[i], train_x[j], sigma);
    k[i][i] += lambda;
    rhs[i] = y[i] - mean;
  }
  const auto alpha = gauss_solve(k, rhs);
  std::vector<double> out;
  for (const auto& t : test_x) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += alpha[j] * rbf(t, train_x[j], sigma);
    out.push_back(s + mean);
  }
  return out;
}

/// Pooled per-feature population mean and std.
inline std::pair<std::vector<double>, std::vector<double>> pooled_moments(const std::vector<Rows>& bags) {
  const std::size_t d = bags.front().front().size();
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  double n = 0.0;
  for (const auto& b : bags) {
    for (const auto& r : b) {
      for (std::size_t k = 0; k < d; ++k) mean[k] += r[k];
      n += 1.0;
    }
  }
  for (auto& m : mean) m /= n;
  for (const auto& b : bags) {
    for (const auto& r : b) {
      for (std::size_t k = 0; k < d; ++k) sd[k] += (r[k] - mean[k]) * (r[k] - mean[k]);
    }
  }
  for (auto& s : sd) s = std::sqrt(s / n);
  return {mean, sd};
}

/// Random bag dataset: `bags` bags with 1..max_n instances in dimension d.
inline distreg::BagDataset random_dataset(std::mt19937_64& gen, std::size_t bags, std::size_t max_n,
                                          std::size_t d, double spread = 1.0) {
  std::normal_distribution<double> normal(0.0, spread);
  std::uniform_int_distribution<std::size_t> count(1, max_n);
  std::vector<distreg::Bag> out;
  distreg::Vector y(static_cast<Eigen::Index>(bags));
  for (std::size_t b = 0; b < bags; ++b) {
    const std::size_t n = count(gen);
    distreg::Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(gen);
    }
    out.push_back(distreg::Bag{"b" + std::to_string(b), std::move(m)});
    y(static_cast<Eigen::Index>(b)) = normal(gen);
  }
  return distreg::BagDataset(std::move(out), std::move(y));
}

inline distreg::BagDataset singleton_dataset(std::mt19937_64& gen, std::size_t bags, std::size_t d) {
  return random_dataset(gen, bags, 1, d);
}

}  // namespace oracle

#include "distreg/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>

#include "distreg/error.hpp"

namespace distreg {

namespace {

constexpr int kRefinementSteps = 2;

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("ridge lambda must be positive and finite, got " + std::to_string(lambda));
  }
}

}  // namespace

SpdSolve solve_regularized_spd(const Eigen::MatrixXd& a, const Vector& rhs, double lambda) {
  check_lambda(lambda);
  const Eigen::Index n = a.rows();
  if (a.cols() != n || rhs.size() != n) {
    throw DimensionError("ridge system is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " with a right-hand side of length " +
                         std::to_string(rhs.size()));
  }
  if (!a.allFinite() || !rhs.allFinite()) throw IllConditionedError("ridge system has non-finite entries");

  Eigen::MatrixXd system = a;
  system.diagonal().array() += lambda;
  const double unit = std::abs(a.trace()) / static_cast<double>(std::max<Eigen::Index>(n, 1));

  auto try_factor = [&](double jitter) -> std::optional<SpdSolve> {
    Eigen::MatrixXd m = system;
    if (jitter > 0.0) m.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return std::nullopt;
    Vector x = llt.solve(rhs);
    if (!x.allFinite()) return std::nullopt;
    // Refine against the unjittered system.
    for (int step = 0; step < kRefinementSteps; ++step) {
      const Vector residual = rhs - system * x;
      x += llt.solve(residual);
    }
    if (!x.allFinite()) return std::nullopt;
    return SpdSolve{std::move(x), jitter};
  };

  if (auto s = try_factor(0.0)) return *s;
  std::ostringstream tried;
  tried << "0";
  for (const double eps : kJitterSchedule) {
    const double jitter = eps * unit;
    tried << ", " << jitter;
    if (jitter > 0.0) {
      if (auto s = try_factor(jitter)) return *s;
    }
  }
  throw IllConditionedError("Cholesky factorization failed for " + std::to_string(n) + "x" +
                            std::to_string(n) + " system (lambda " + std::to_string(lambda) +
                            "); tried diagonal jitter " + tried.str());
}

RidgeSolution solve_ridge_dual(const Eigen::MatrixXd& gram, const Vector& y, double lambda) {
  SpdSolve s = solve_regularized_spd(gram, y, lambda);
  return RidgeSolution{std::move(s.solution), 0.0, lambda, s.jitter};
}

RidgeSolution fit_dual_centered(const Eigen::MatrixXd& gram, const Vector& y, double lambda) {
  const double mean = y.mean();
  const Vector centered = y.array() - mean;
  RidgeSolution sol = solve_ridge_dual(gram, centered, lambda);
  sol.intercept = mean;
  return sol;
}

RidgeSolution fit_primal_centered(const Matrix& features, const Vector& y, double lambda,
                                  bool center_features, PrimalRoute route) {
  const Eigen::Index rows = features.rows();
  const Eigen::Index p = features.cols();
  if (y.size() != rows) {
    throw DimensionError("primal ridge: " + std::to_string(rows) + " feature rows but " +
                         std::to_string(y.size()) + " targets");
  }
  const double y_mean = y.mean();
  const Vector yc = y.array() - y_mean;

  Eigen::MatrixXd x = features;
  Vector center = Vector::Zero(p);
  if (center_features) {
    center = x.colwise().mean().transpose();
    x.rowwise() -= center.transpose();
  }

  if (route == PrimalRoute::kAuto) route = p <= rows ? PrimalRoute::kNormal : PrimalRoute::kPushThrough;

  Vector w;
  double jitter = 0.0;
  if (route == PrimalRoute::kNormal) {
    const Eigen::MatrixXd xtx = x.transpose() * x;
    SpdSolve s = solve_regularized_spd(xtx, x.transpose() * yc, lambda);
    w = std::move(s.solution);
    jitter = s.jitter;
  } else {
    const Eigen::MatrixXd xxt = x * x.transpose();
    SpdSolve s = solve_regularized_spd(xxt, yc, lambda);
    w = x.transpose() * s.solution;
    jitter = s.jitter;
  }
  const double intercept = y_mean - center.dot(w);
  return RidgeSolution{std::move(w), intercept, lambda, jitter};
}

}  // namespace distreg

#pragma once

#include <array>

#include "distreg/linalg.hpp"

namespace distreg {

/// Diagonal jitter schedule, in units of trace(A) / n, tried in order when the
/// Cholesky factorization of A + lambda I fails.
inline constexpr std::array<double, 3> kJitterSchedule{1e-10, 1e-8, 1e-6};

struct RidgeSolution {
  Vector coefficients;  // dual alpha (length B) or primal w (length p)
  double intercept = 0.0;
  double lambda = 0.0;
  double jitter = 0.0;  // absolute diagonal jitter that was needed, 0 if none
};

struct SpdSolve {
  Vector solution;
  double jitter = 0.0;
};

/// Solves (A + lambda I) x = rhs for symmetric positive semidefinite A by
/// Cholesky factorization, escalating through kJitterSchedule on failure and
/// finishing with iterative refinement against the unjittered system.
/// Throws IllConditionedError listing the attempted jitters.
SpdSolve solve_regularized_spd(const Eigen::MatrixXd& a, const Vector& rhs, double lambda);

/// alpha = (gram + lambda I)^{-1} y. No centering; intercept is 0.
RidgeSolution solve_ridge_dual(const Eigen::MatrixXd& gram, const Vector& y, double lambda);

/// Dual ridge on centred targets: alpha fits y - mean(y), intercept = mean(y).
RidgeSolution fit_dual_centered(const Eigen::MatrixXd& gram, const Vector& y, double lambda);

enum class PrimalRoute {
  kAuto,         // normal equations when p <= B, push-through identity otherwise
  kNormal,       // w = (X'X + lambda I)^{-1} X'y
  kPushThrough,  // w = X'(XX' + lambda I)^{-1} y, same solution in exact arithmetic
};

/// Primal ridge on centred targets. With `center_features` the columns of X are
/// centred too (an unpenalized intercept for a linear model); otherwise the
/// intercept is just mean(y). Coefficients always act on uncentred inputs:
/// prediction = x.w + intercept.
RidgeSolution fit_primal_centered(const Matrix& features, const Vector& y, double lambda,
                                  bool center_features, PrimalRoute route = PrimalRoute::kAuto);

}  // namespace distreg

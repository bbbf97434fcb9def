#pragma once

// Constant-stepsize FISTA for the complex LASSO
//
//     min_x  1/2 ||A x - y||_2^2 + lambda ||x||_1
//
// over any matrix-free linear operator exposing apply / apply_adjoint.

#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ncsense/errors.hpp"
#include "ncsense/linalg.hpp"

namespace ncsense {

template <typename Op>
concept LinearOperator = requires(const Op& op, const CVector& v) {
  { op.rows() } -> std::convertible_to<int>;
  { op.cols() } -> std::convertible_to<int>;
  { op.apply(v) } -> std::convertible_to<CVector>;
  { op.apply_adjoint(v) } -> std::convertible_to<CVector>;
};

struct FistaConfig {
  double lambda = 0.0;
  int max_iters = 500;
  double error_tol = 1e-6;
  std::optional<double> lipschitz;  // nullopt: estimate by power iteration
  std::uint64_t lipschitz_seed = 0;
};

struct FistaResult {
  CVector solution;
  int iterations = 0;
  std::vector<double> residual_history;  // ||A x_k - y||_2, one per iteration
  bool converged = false;
  double objective = 0.0;
  double lipschitz = 0.0;
};

// Magnitude shrinkage: u -> u * max(|u| - t, 0) / |u|. Phase is kept.
inline CVector soft_threshold(const CVector& v, double t) {
  if (t < 0) throw std::invalid_argument("soft threshold must be nonnegative");
  CVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]);
    out[i] = mag > t ? v[i] * ((mag - t) / mag) : cplx(0.0, 0.0);
  }
  return out;
}

inline double l1_norm(const CVector& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::abs(v[i]);
  return s;
}

inline constexpr double kLipschitzSafety = 1.05;

// Power iteration on A^H A; returns 1.05 * ||A||_2^2.
template <LinearOperator Op>
double estimate_lipschitz(const Op& op, int iters, std::uint64_t seed) {
  if (iters < 1) throw std::invalid_argument("power iteration needs at least one step");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  CVector x(op.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = cplx(normal(rng), normal(rng));
  x.normalize();
  double estimate = 0.0;
  for (int k = 0; k < iters; ++k) {
    CVector next = op.apply_adjoint(op.apply(x));
    const double norm = next.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw DegenerateOperatorError("operator annihilates the power-iteration vector");
    }
    x = next / norm;
    estimate = norm;
  }
  // Rayleigh quotient on the final unit vector.
  estimate = std::max(estimate, op.apply(x).squaredNorm());
  return kLipschitzSafety * estimate;
}

template <LinearOperator Op>
double lasso_objective(const Op& op, const CVector& x, const CVector& y, double lambda) {
  return 0.5 * (op.apply(x) - y).squaredNorm() + lambda * l1_norm(x);
}

template <LinearOperator Op>
FistaResult fista_solve(const Op& op, const CVector& y, const FistaConfig& cfg) {
  if (y.size() != op.rows()) {
    throw DimensionError("observation has length " + std::to_string(y.size()) +
                         " but operator has " + std::to_string(op.rows()) + " rows");
  }
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (cfg.error_tol < 0 || cfg.lambda < 0) {
    throw std::invalid_argument("lambda and error_tol must be nonnegative");
  }

  FistaResult result;
  result.lipschitz = cfg.lipschitz ? *cfg.lipschitz : estimate_lipschitz(op, 50, cfg.lipschitz_seed);
  if (!(result.lipschitz > 0)) throw std::invalid_argument("lipschitz constant must be positive");
  const double step = 1.0 / result.lipschitz;
  const double threshold = cfg.lambda * step;

  const int n = op.cols();
  CVector x_prev = CVector::Zero(n);
  CVector ax_prev = CVector::Zero(op.rows());
  CVector momentum = x_prev;   // extrapolated point y_k
  CVector a_momentum = ax_prev;  // A y_k, kept by linearity
  double t = 1.0;
  double err_prev = y.norm();

  double best_objective = std::numeric_limits<double>::infinity();
  result.solution = x_prev;
  result.residual_history.reserve(cfg.max_iters);

  for (int k = 1; k <= cfg.max_iters; ++k) {
    const CVector grad = op.apply_adjoint(a_momentum - y);
    CVector x = soft_threshold(momentum - step * grad, threshold);
    CVector ax = op.apply(x);
    const double err = (ax - y).norm();
    if (!std::isfinite(err)) {
      throw DivergenceError("non-finite residual at iteration " + std::to_string(k));
    }
    result.residual_history.push_back(err);
    result.iterations = k;

    const double objective = 0.5 * err * err + cfg.lambda * l1_norm(x);
    if (objective < best_objective) {
      best_objective = objective;
      result.solution = x;
    }

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    momentum = x + beta * (x - x_prev);
    a_momentum = ax + beta * (ax - ax_prev);

    if (std::abs(err - err_prev) < cfg.error_tol) {
      result.converged = true;
      break;
    }
    x_prev = std::move(x);
    ax_prev = std::move(ax);
    err_prev = err;
    t = t_next;
  }
  result.objective = best_objective;
  return result;
}

}  // namespace ncsense

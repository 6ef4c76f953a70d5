#pragma once

// Small dense bounded nonlinear least squares: projected Levenberg-Marquardt
// with Marquardt diagonal scaling and an active set for variables pinned at
// a bound. Intended for a handful of parameters and residuals.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace eshelby::lsq {

enum class StopReason {
  ResidualTolerance,
  StepTolerance,
  StationaryPoint,
  MaxIterations,
};

struct Options {
  int max_iterations = 100;
  /// Relative step size below which the iteration stops.
  double step_tolerance = 1e-10;
  /// Absolute cost below which the iteration stops.
  double cost_tolerance = 0.0;
  double fd_step = 1e-7;
};

template <int N>
struct Result {
  Eigen::Matrix<double, N, 1> x;
  double cost = 0.0;
  int iterations = 0;
  int evaluations = 0;
  StopReason reason = StopReason::MaxIterations;
  Eigen::Matrix<bool, N, 1> at_lower;
  Eigen::Matrix<bool, N, 1> at_upper;

  bool converged() const noexcept { return reason != StopReason::MaxIterations; }
};

/// Minimises sum(r_k^2) over lower <= x <= upper.
/// `residual(x, r)` fills r (fixed size M) and returns nothing; the cost is
/// r.squaredNorm(). x0 is projected into the box first.
template <int N, int M, class Residual>
Result<N> minimize(const Residual& residual, Eigen::Matrix<double, N, 1> x0,
                   const Eigen::Matrix<double, N, 1>& lower,
                   const Eigen::Matrix<double, N, 1>& upper, const Options& opt) {
  using VecN = Eigen::Matrix<double, N, 1>;
  using VecM = Eigen::Matrix<double, M, 1>;
  using MatMN = Eigen::Matrix<double, M, N>;
  using MatNN = Eigen::Matrix<double, N, N>;

  Result<N> res;
  VecN x = x0.cwiseMax(lower).cwiseMin(upper);
  VecM r;
  residual(x, r);
  ++res.evaluations;
  double cost = r.squaredNorm();
  double damping = 1e-3;

  auto finish = [&](StopReason why) {
    res.x = x;
    res.cost = cost;
    res.reason = why;
    for (int i = 0; i < N; ++i) {
      const double span = upper(i) - lower(i);
      res.at_lower(i) = x(i) - lower(i) <= 1e-12 * std::max(1.0, std::abs(span));
      res.at_upper(i) = upper(i) - x(i) <= 1e-12 * std::max(1.0, std::abs(span));
    }
    return res;
  };

  if (cost <= opt.cost_tolerance) return finish(StopReason::ResidualTolerance);

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    res.iterations = iter + 1;

    // Jacobian by central differences, one-sided against a bound.
    MatMN jac;
    for (int j = 0; j < N; ++j) {
      const double h = opt.fd_step * std::max(1.0, std::abs(x(j)));
      VecN xp = x;
      VecN xm = x;
      xp(j) = std::min(x(j) + h, upper(j));
      xm(j) = std::max(x(j) - h, lower(j));
      VecM rp;
      VecM rm;
      residual(xp, rp);
      residual(xm, rm);
      res.evaluations += 2;
      jac.col(j) = (rp - rm) / (xp(j) - xm(j));
    }
    const VecN grad = jac.transpose() * r;
    const MatNN jtj = jac.transpose() * jac;

    // Variables at a bound whose descent direction points outward stay fixed.
    Eigen::Matrix<bool, N, 1> free;
    bool any_free = false;
    for (int j = 0; j < N; ++j) {
      const bool pinned_low = x(j) <= lower(j) && grad(j) > 0.0;
      const bool pinned_high = x(j) >= upper(j) && grad(j) < 0.0;
      free(j) = !(pinned_low || pinned_high);
      any_free = any_free || free(j);
    }
    double proj_grad = 0.0;
    for (int j = 0; j < N; ++j) {
      if (free(j)) proj_grad = std::max(proj_grad, std::abs(grad(j)));
    }
    if (!any_free || proj_grad <= std::numeric_limits<double>::min()) {
      return finish(StopReason::StationaryPoint);
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      MatNN lhs = jtj;
      VecN rhs = -grad;
      for (int j = 0; j < N; ++j) {
        lhs(j, j) += damping * std::max(jtj(j, j), 1e-30);
        if (!free(j)) {
          lhs.row(j).setZero();
          lhs.col(j).setZero();
          lhs(j, j) = 1.0;
          rhs(j) = 0.0;
        }
      }
      const VecN step = lhs.ldlt().solve(rhs);
      const VecN x_new = (x + step).cwiseMax(lower).cwiseMin(upper);
      const VecN taken = x_new - x;
      VecM r_new;
      residual(x_new, r_new);
      ++res.evaluations;
      const double cost_new = r_new.squaredNorm();
      if (std::isfinite(cost_new) && cost_new < cost) {
        accepted = true;
        x = x_new;
        r = r_new;
        cost = cost_new;
        damping = std::max(damping / 3.0, 1e-12);
        if (cost <= opt.cost_tolerance) return finish(StopReason::ResidualTolerance);
        if (taken.norm() <= opt.step_tolerance * (x.norm() + opt.step_tolerance)) {
          return finish(StopReason::StepTolerance);
        }
      } else {
        damping *= 4.0;
        if (taken.norm() <= opt.step_tolerance * (x.norm() + opt.step_tolerance)) {
          // No representable improvement left along the damped direction.
          return finish(StopReason::StepTolerance);
        }
      }
    }
    if (!accepted) return finish(StopReason::StationaryPoint);
  }
  return finish(StopReason::MaxIterations);
}

}  // namespace eshelby::lsq

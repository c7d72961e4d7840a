// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_ANALYSIS_SECOND_ORDER_HPP
#define POLLING_ANALYSIS_SECOND_ORDER_HPP

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "polling/analysis/affine_cycle.hpp"
#include "polling/analysis/busy_period.hpp"
#include "polling/analysis/first_order.hpp"
#include "polling/error.hpp"
#include "polling/linalg.hpp"
#include "polling/model/system.hpp"

namespace polling {

/// Second factorial moments f_i(j,k) at every polling epoch under BEP.
struct SecondMomentSolution {
  std::vector<Matrix> F;  ///< F[i](j,k) = E[Q_j(A_i) Q_k(A_i)] for j != k, E[Q_k(Q_k - 1)] on the diagonal
  Matrix q;               ///< first moments the solution was built on
  std::size_t cycles = 0;

  /// E[Q_k(A_i)^2].
  double second_moment(std::size_t i, std::size_t k) const {
    const auto kk = static_cast<Eigen::Index>(k);
    return F[i](kk, kk) + q(static_cast<Eigen::Index>(i), kk);
  }

  double cross_moment(std::size_t i, std::size_t j, std::size_t k) const {
    return F[i](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
  }

  double variance(std::size_t i, std::size_t k) const {
    const double m = q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    return second_moment(i, k) - m * m;
  }
};

/**
 * One step of the second-order equations: F at the polling epoch of `stage`
 * (with first moments `f` at that epoch) to F at the next polling epoch.
 * Entries are filled case by case on whether j or k is the served queue.
 */
inline Matrix second_order_step(const SystemModel& m, const std::vector<double>& r, std::size_t stage,
                                const Vector& f, const Matrix& F) {
  const auto K = static_cast<Eigen::Index>(m.queue_count());
  const auto p = static_cast<Eigen::Index>(m.queue_at(stage));
  const double ri = r[stage];
  const double s = m.switchover_mean(stage);
  const double ev2 = m.switchover(stage).second_moment();
  const auto bp = busy_period_of(m, static_cast<std::size_t>(p));
  const double et = bp.mean;
  const double et2 = bp.second;
  const double lp = m.lambda(static_cast<std::size_t>(p));
  const double keep = 1.0 - ri;

  Matrix out(K, K);
  for (Eigen::Index j = 0; j < K; ++j) {
    const double lj = m.lambda(static_cast<std::size_t>(j));
    for (Eigen::Index k = j; k < K; ++k) {
      const double lk = m.lambda(static_cast<std::size_t>(k));
      double v;
      if (j != p && k != p) {
        v = lj * lk * ev2 + lk * s * f(j) + lj * s * f(k) + 2.0 * lj * lk * s * f(p) * ri * et + F(j, k) +
            lj * F(p, k) * ri * et + lk * F(p, j) * ri * et + lj * lk * F(p, p) * ri * ri * et * et +
            lj * lk * f(p) * ri * et2;
      } else if (j == p && k == p) {
        v = lp * lp * ev2 + 2.0 * lp * s * f(p) * keep + F(p, p) * keep * keep;
      } else {
        const Eigen::Index o = (j == p) ? k : j;  // the queue not being served
        const double lo = m.lambda(static_cast<std::size_t>(o));
        v = lp * lo * ev2 + lo * s * f(p) * keep + lp * s * f(o) + lp * lo * s * f(p) * ri * et + F(p, o) * keep +
            lo * F(p, p) * ri * keep * et;
      }
      out(j, k) = v;
      out(k, j) = v;
    }
  }
  return out;
}

/**
 * Fixed point of the second-order equations over one cycle, by successive
 * application from the zero matrix. `first` must be the first-order solution
 * of the same (model, r).
 */
inline SecondMomentSolution solve_second_order(const SystemModel& m, const std::vector<double>& r,
                                               const FirstMomentSolution& first, const SolverOptions& opt = {}) {
  const auto I = m.stage_count();
  const auto K = static_cast<Eigen::Index>(m.queue_count());
  if (first.q.rows() != static_cast<Eigen::Index>(I) || first.q.cols() != K)
    throw DomainError("first-order solution does not match the model dimensions");

  std::vector<Matrix> F(I, Matrix::Zero(K, K));
  Matrix start = Matrix::Zero(K, K);
  for (std::size_t c = 1; c <= opt.max_iters; ++c) {
    F[0] = start;
    for (std::size_t i = 0; i + 1 < I; ++i)
      F[i + 1] = second_order_step(m, r, i, first.q.row(static_cast<Eigen::Index>(i)).transpose(), F[i]);
    const Matrix next =
        second_order_step(m, r, I - 1, first.q.row(static_cast<Eigen::Index>(I - 1)).transpose(), F[I - 1]);
    if (!next.allFinite())
      throw ConvergenceError("second-order iteration diverged after " + std::to_string(c) + " cycles");
    const double change = (next - start).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
    start = next;
    if (change < opt.tol * scale) {
      F[0] = start;
      for (std::size_t i = 0; i + 1 < I; ++i)
        F[i + 1] = second_order_step(m, r, i, first.q.row(static_cast<Eigen::Index>(i)).transpose(), F[i]);
      return {std::move(F), first.q, c};
    }
  }
  throw ConvergenceError("second-order iteration did not converge within " + std::to_string(opt.max_iters) +
                         " cycles");
}

inline SecondMomentSolution solve_second_order(const SystemModel& m, const std::vector<double>& r,
                                               const SolverOptions& opt = {}) {
  return solve_second_order(m, r, solve_first_order(m, r, opt), opt);
}

/// Largest violation of the second-order equations by a candidate solution.
inline double second_order_residual(const SystemModel& m, const std::vector<double>& r,
                                    const SecondMomentSolution& sol) {
  const auto I = m.stage_count();
  double worst = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    const Matrix next = second_order_step(m, r, i, sol.q.row(static_cast<Eigen::Index>(i)).transpose(), sol.F[i]);
    worst = std::max(worst, (next - sol.F[(i + 1) % I]).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace polling

#endif  // POLLING_ANALYSIS_SECOND_ORDER_HPP

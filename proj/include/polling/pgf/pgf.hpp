// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_PGF_PGF_HPP
#define POLLING_PGF_PGF_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "polling/analysis/diagnostics.hpp"
#include "polling/error.hpp"
#include "polling/linalg.hpp"
#include "polling/model/system.hpp"
#include "polling/model/validate.hpp"
#include "polling/pgf/busy_period_lst.hpp"

namespace polling {

/// State of the backward recursion after j steps from stage i.
struct RecursionState {
  std::size_t j = 0;
  std::size_t stage = 0;  ///< stage j steps before i (i itself for j = 0)
  Vector z;               ///< z^{(j)}
  Vector y_parts;         ///< lambda_k (1 - z_k^{(j)})
  double y = 0.0;         ///< sum of y_parts
};

struct PgfOptions {
  double tail_tol = 1e-12;
  double truncation_tol = 1e-9;
  std::size_t max_steps = 10'000'000;
};

struct PgfEvaluation {
  double log_value = 0.0;   ///< log F_i(z)
  double tail_bound = 0.0;  ///< bound on the discarded part of -log F_i(z)
  std::size_t steps = 0;    ///< factors kept (a multiple of I)

  double value() const { return std::exp(log_value); }
};

namespace detail {

inline void check_z(const SystemModel& m, const Vector& z) {
  if (z.size() != static_cast<Eigen::Index>(m.queue_count()))
    throw DomainError("z needs one entry per queue");
  for (Eigen::Index k = 0; k < z.size(); ++k)
    if (!(z(k) >= 0.0 && z(k) <= 1.0)) throw DomainError("z must lie in [0,1]^K");
}

/// Applies step j (visit to stage w) in place on the y components.
inline void recursion_step(const SystemModel& m, const std::vector<double>& r, std::size_t w, Vector& yk) {
  const auto p = m.queue_at(w);
  const auto pi = static_cast<Eigen::Index>(p);
  const double others = yk.sum() - yk(pi);
  const double phi = busy_period_lst_complement(m.lambda(p), m.service(p), std::max(others, 0.0));
  yk(pi) = (1.0 - r[w]) * yk(pi) + m.lambda(p) * r[w] * phi;
}

/// Cycle contraction of the queue-weighted recursion bound, seen from stage i.
inline double cycle_contraction(const SystemModel& m, const std::vector<double>& r, std::size_t i) {
  const auto K = static_cast<Eigen::Index>(m.queue_count());
  Matrix prod = Matrix::Identity(K, K);
  for (std::size_t l = 1; l <= m.stage_count(); ++l)
    prod = contraction_matrix(m, r, m.table().lookback(i, l), 0.0) * prod;
  return prod.rowwise().sum().maxCoeff();
}

inline double max_switchover_mean(const SystemModel& m) {
  double v = 0.0;
  for (std::size_t l = 0; l < m.stage_count(); ++l) v = std::max(v, m.switchover_mean(l));
  return v;
}

/// Upper bound on sum_{j >= J} y^{(j)} times the largest switchover mean.
inline double tail_bound(const SystemModel& m, const Vector& yk, double contraction) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < yk.size(); ++k) worst = std::max(worst, yk(k) / m.rho(static_cast<std::size_t>(k)));
  return max_switchover_mean(m) * m.total_rho() * worst * static_cast<double>(m.stage_count()) / (1.0 - contraction);
}

inline Vector y_from_z(const SystemModel& m, const Vector& z) {
  Vector y(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) y(k) = m.lambda(static_cast<std::size_t>(k)) * (1.0 - z(k));
  return y;
}

/// log F_i evaluated from initial y components; `fixed_steps` > 0 forces the step count.
inline PgfEvaluation log_pgf_from_y(const SystemModel& m, const std::vector<double>& r, std::size_t stage, Vector yk,
                                    const PgfOptions& opt, std::size_t fixed_steps = 0) {
  const auto I = m.stage_count();
  const double c = cycle_contraction(m, r, stage);
  PgfEvaluation out;
  double acc = 0.0;
  for (std::size_t j = 1; j <= opt.max_steps; ++j) {
    const auto w = m.table().lookback(stage, j);
    acc += std::log1p(-m.switchover(w).lst_complement(yk.sum()));
    recursion_step(m, r, w, yk);
    if (j % I != 0) continue;
    if (fixed_steps > 0) {
      if (j < fixed_steps) continue;
      out = {acc, tail_bound(m, yk, c), j};
      return out;
    }
    if (yk.sum() < opt.tail_tol) {
      const double bound = tail_bound(m, yk, c);
      if (bound < opt.truncation_tol) return {acc, bound, j};
    }
  }
  throw ConvergenceError("PGF tail bound not reached within " + std::to_string(opt.max_steps) + " steps");
}

}  // namespace detail

/// The first `steps` + 1 states of the recursion started at z0 from stage i.
inline std::vector<RecursionState> pgf_recursion(const SystemModel& m, const std::vector<double>& r,
                                                 std::size_t stage, const Vector& z0, std::size_t steps) {
  require_valid(m, Bep{r});
  detail::check_z(m, z0);
  if (stage >= m.stage_count()) throw DomainError("stage index out of range");
  std::vector<RecursionState> out;
  out.reserve(steps + 1);
  Vector yk = detail::y_from_z(m, z0);
  auto snapshot = [&](std::size_t j) {
    RecursionState s;
    s.j = j;
    s.stage = m.table().lookback(stage, j);
    s.y_parts = yk;
    s.y = yk.sum();
    s.z.resize(yk.size());
    for (Eigen::Index k = 0; k < yk.size(); ++k) s.z(k) = 1.0 - yk(k) / m.lambda(static_cast<std::size_t>(k));
    out.push_back(std::move(s));
  };
  snapshot(0);
  for (std::size_t j = 1; j <= steps; ++j) {
    detail::recursion_step(m, r, m.table().lookback(stage, j), yk);
    snapshot(j);
  }
  return out;
}

/// log F_i(z) through the truncated infinite product.
inline PgfEvaluation log_pgf(const SystemModel& m, const std::vector<double>& r, std::size_t stage, const Vector& z,
                             const PgfOptions& opt = {}) {
  require_valid(m, Bep{r});
  detail::check_z(m, z);
  if (stage >= m.stage_count()) throw DomainError("stage index out of range");
  return detail::log_pgf_from_y(m, r, stage, detail::y_from_z(m, z), opt);
}

/// F_i(z), the joint PGF of the queue lengths at the polling epoch of stage i.
inline double evaluate_pgf(const SystemModel& m, const std::vector<double>& r, std::size_t stage, const Vector& z,
                           const PgfOptions& opt = {}) {
  return log_pgf(m, r, stage, z, opt).value();
}

/**
 * Factorial moment of order 1 or 2 of Q_k(A_i), by one-sided differences of
 * h -> log F_i(1, ..., 1 - h, ..., 1) at h = 0 with Richardson extrapolation
 * over the steps 1e-4 and 5e-5. The product length is fixed across all
 * evaluation points so that truncation does not leak into the differences.
 */
inline double pgf_moment_numeric(const SystemModel& m, const std::vector<double>& r, std::size_t stage,
                                 std::size_t queue, int order, const PgfOptions& opt = {}) {
  if (order != 1 && order != 2) throw DomainError("numeric PGF moments support orders 1 and 2");
  require_valid(m, Bep{r});
  if (stage >= m.stage_count() || queue >= m.queue_count()) throw DomainError("stage or queue index out of range");
  const double lam = m.lambda(queue);
  const auto K = static_cast<Eigen::Index>(m.queue_count());
  auto y_at = [&](double h) {
    Vector y = Vector::Zero(K);
    y(static_cast<Eigen::Index>(queue)) = lam * h;
    return y;
  };
  const std::vector<double> hs{1e-4, 5e-5};
  std::size_t steps = 0;
  for (double h : hs)
    for (int t = 1; t <= 3; ++t)
      steps = std::max(steps, detail::log_pgf_from_y(m, r, stage, y_at(t * h), opt).steps);
  auto L = [&](double h) { return detail::log_pgf_from_y(m, r, stage, y_at(h), opt, steps).log_value; };

  std::vector<double> est;
  for (double h : hs) {
    if (h < 1e-300) throw DomainError("finite-difference step underflow");
    const double l1 = L(h), l2 = L(2 * h), l3 = L(3 * h);
    // L(0) = 0 exactly; second-order one-sided stencils in h
    const double d1 = -(4.0 * l1 - l2) / (2.0 * h);  // dL/dz at z = 1
    if (order == 1) {
      est.push_back(d1);
    } else {
      const double d2 = (-5.0 * l1 + 4.0 * l2 - l3) / (h * h);
      est.push_back(d2 + d1 * d1);
    }
  }
  return (4.0 * est[1] - est[0]) / 3.0;
}

}  // namespace polling

#endif  // POLLING_PGF_PGF_HPP

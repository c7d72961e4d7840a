// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_ANALYSIS_FIRST_ORDER_HPP
#define POLLING_ANALYSIS_FIRST_ORDER_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "polling/analysis/affine_cycle.hpp"
#include "polling/analysis/busy_period.hpp"
#include "polling/error.hpp"
#include "polling/linalg.hpp"
#include "polling/model/system.hpp"
#include "polling/model/validate.hpp"

namespace polling {

/// Mean queue lengths at every polling epoch under BEP.
struct FirstMomentSolution {
  Matrix q;                  ///< q(i, k) = E[Q_k(A_i)], stages by rows
  double cycle_length = 0.0;  ///< s / (1 - rho)
  std::vector<double> busy;   ///< mean visit length per stage
  std::size_t cycles = 0;     ///< cycle-map applications used (0 for closed forms)
};

/// Affine map taking mean queue lengths at the polling epoch of `stage` to
/// those at the next polling epoch under BEP.
inline AffineStage first_order_stage(const SystemModel& m, const std::vector<double>& r, std::size_t stage) {
  const auto K = static_cast<Eigen::Index>(m.queue_count());
  const auto p = static_cast<Eigen::Index>(m.queue_at(stage));
  const double ri = r[stage];
  const double etheta = busy_period_of(m, static_cast<std::size_t>(p)).mean;
  AffineStage st{Matrix::Identity(K, K), Vector(K)};
  for (Eigen::Index k = 0; k < K; ++k) {
    st.b(k) = m.switchover_mean(stage) * m.lambda(static_cast<std::size_t>(k));
    if (k != p) st.A(k, p) = ri * m.lambda(static_cast<std::size_t>(k)) * etheta;
  }
  st.A(p, p) = 1.0 - ri;
  return st;
}

inline std::vector<AffineStage> first_order_stages(const SystemModel& m, const std::vector<double>& r) {
  std::vector<AffineStage> out;
  for (std::size_t i = 0; i < m.stage_count(); ++i) out.push_back(first_order_stage(m, r, i));
  return out;
}

namespace detail {

inline FirstMomentSolution finish_first_order(const SystemModel& m, const std::vector<double>& r, Matrix q,
                                              std::size_t cycles) {
  FirstMomentSolution sol{std::move(q), m.cycle_length(), {}, cycles};
  for (std::size_t i = 0; i < m.stage_count(); ++i) {
    const auto p = m.queue_at(i);
    sol.busy.push_back(r[i] * sol.q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) *
                       busy_period_of(m, p).mean);
  }
  return sol;
}

}  // namespace detail

/**
 * Solves the first-order buffer-occupancy equations by applying the cycle map
 * repeatedly, starting from the zero vector (or `start`, the state at the
 * epoch of stage 1, when given).
 */
inline FirstMomentSolution solve_first_order(const SystemModel& m, const std::vector<double>& r,
                                             const SolverOptions& opt = {},
                                             const std::optional<Vector>& start = std::nullopt) {
  require_valid(m, Bep{r});
  const auto stages = first_order_stages(m, r);
  const auto K = static_cast<Eigen::Index>(m.queue_count());
  const auto fp = iterate_cycle(stages, start ? *start : Vector::Zero(K), opt);
  return detail::finish_first_order(m, r, propagate(stages, fp.x), fp.cycles);
}

/// Same solution through one dense solve of the composed cycle map.
inline FirstMomentSolution solve_first_order_direct(const SystemModel& m, const std::vector<double>& r) {
  require_valid(m, Bep{r});
  const auto stages = first_order_stages(m, r);
  return detail::finish_first_order(m, r, propagate(stages, solve_cycle_direct(stages)), 0);
}

/// Closed form for cyclic tables (stage k visits queue k) with every r_k > 0.
inline FirstMomentSolution closed_form_cyclic(const SystemModel& m, const std::vector<double>& r) {
  if (!m.table().is_cyclic()) throw DomainError("closed form requires a cyclic polling table");
  require_valid(m, Bep{r});
  const std::size_t K = m.queue_count();
  for (std::size_t k = 0; k < K; ++k)
    if (!(r[k] > 0.0)) throw DomainError("closed form requires every r_k > 0");
  const double C = m.cycle_length();
  Matrix q(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < K; ++j) {
      double v = (1.0 - m.rho(j)) / r[j] * C;
      // stages k, k+1, ..., j-1 (cyclically) lie between the epochs of k and j
      for (std::size_t l = k; l != j; l = (l + 1) % K) v -= m.switchover_mean(l) + m.rho(l) * C;
      q(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = m.lambda(j) * v;
    }
  }
  return detail::finish_first_order(m, r, std::move(q), 0);
}

/// Largest violation of the equations by `q` (rows are stages).
inline double first_order_residual(const SystemModel& m, const std::vector<double>& r, const Matrix& q) {
  const auto I = m.stage_count();
  double worst = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    const Vector next = first_order_stage(m, r, i).apply(q.row(static_cast<Eigen::Index>(i)).transpose());
    const Vector diff = next - q.row(static_cast<Eigen::Index>((i + 1) % I)).transpose();
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace polling

#endif  // POLLING_ANALYSIS_FIRST_ORDER_HPP

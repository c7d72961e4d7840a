// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_FLUID_FLUID_HPP
#define POLLING_FLUID_FLUID_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "polling/analysis/affine_cycle.hpp"
#include "polling/analysis/first_order.hpp"
#include "polling/error.hpp"
#include "polling/linalg.hpp"
#include "polling/model/system.hpp"
#include "polling/model/validate.hpp"

namespace polling {

struct FluidBreakpoint {
  double time = 0.0;
  Vector level;
};

/// Periodic equilibrium of the deterministic fluid model over one cycle.
struct FluidPE {
  Policy policy;
  Matrix q;                           ///< fluid content at each polling epoch (stages by rows)
  double period = 0.0;
  std::vector<double> stage_busy;
  std::vector<double> stage_switch;
  std::vector<FluidBreakpoint> trajectory;  ///< polling and departure epochs, closed by t = period
  bool consistent = true;                   ///< base-stock: every served queue starts at or above its level

  /// Linear interpolation of the trajectory at time t in [0, period].
  Vector at(double t) const {
    for (std::size_t b = 1; b < trajectory.size(); ++b) {
      if (t <= trajectory[b].time) {
        const auto& lo = trajectory[b - 1];
        const auto& hi = trajectory[b];
        const double span = hi.time - lo.time;
        if (span <= 0.0) return hi.level;
        return lo.level + (t - lo.time) / span * (hi.level - lo.level);
      }
    }
    return trajectory.back().level;
  }
};

/// (n q)^p per stage and queue and (n b)^p per stage.
struct AsymptoticApproximation {
  double n = 1.0;
  int p = 1;
  Matrix queue;
  std::vector<double> busy;
};

namespace detail {

inline void assemble_trajectory(const SystemModel& m, FluidPE& pe) {
  const auto I = m.stage_count();
  const auto K = static_cast<Eigen::Index>(m.queue_count());
  Vector lam(K);
  for (Eigen::Index k = 0; k < K; ++k) lam(k) = m.lambda(static_cast<std::size_t>(k));
  double t = 0.0;
  pe.trajectory.clear();
  for (std::size_t i = 0; i < I; ++i) {
    const Vector start = pe.q.row(static_cast<Eigen::Index>(i)).transpose();
    pe.trajectory.push_back({t, start});
    const auto p = static_cast<Eigen::Index>(m.queue_at(i));
    Vector slope = lam;
    slope(p) -= m.mu(static_cast<std::size_t>(p));
    t += pe.stage_busy[i];
    pe.trajectory.push_back({t, start + pe.stage_busy[i] * slope});
    t += pe.stage_switch[i];
  }
  pe.trajectory.push_back({t, pe.q.row(0).transpose()});
  pe.period = t;
}

inline FluidPE finish_pe(const SystemModel& m, Policy policy, Matrix q, std::vector<double> busy) {
  FluidPE pe{std::move(policy), std::move(q), 0.0, std::move(busy), {}, {}, true};
  for (std::size_t i = 0; i < m.stage_count(); ++i) pe.stage_switch.push_back(m.switchover_mean(i));
  assemble_trajectory(m, pe);
  return pe;
}

/// Solves the PE balance equations given one affine map per stage; refuses non-contracting cycles.
inline Matrix solve_balance(const std::vector<AffineStage>& stages, const char* what, const SolverOptions& opt) {
  const double rad = spectral_radius(compose_cycle(stages).A);
  if (!(rad < 1.0))
    throw ConvergenceError(std::string(what) + " balance equations do not contract (cycle spectral radius " +
                           std::to_string(rad) + ")");
  const auto K = stages.front().b.size();
  return propagate(stages, iterate_cycle(stages, Vector::Zero(K), opt).x);
}

}  // namespace detail

/// Binomial-exhaustive PE; its polling-epoch contents solve the first-order buffer-occupancy equations.
inline FluidPE fluid_pe_bep(const SystemModel& m, const std::vector<double>& r, const SolverOptions& opt = {}) {
  const auto first = solve_first_order(m, r, opt);
  std::vector<double> busy;
  for (std::size_t i = 0; i < m.stage_count(); ++i) {
    const auto p = m.queue_at(i);
    busy.push_back(r[i] * first.q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) /
                   (m.mu(p) - m.lambda(p)));
  }
  return detail::finish_pe(m, Bep{r}, first.q, std::move(busy));
}

inline std::vector<AffineStage> bgp_stages(const SystemModel& m, const std::vector<double>& r) {
  const auto K = static_cast<Eigen::Index>(m.queue_count());
  std::vector<AffineStage> stages;
  for (std::size_t i = 0; i < m.stage_count(); ++i) {
    const auto p = m.queue_at(i);
    const auto pi = static_cast<Eigen::Index>(p);
    AffineStage st{Matrix::Identity(K, K), Vector(K)};
    for (Eigen::Index k = 0; k < K; ++k) {
      const double lk = m.lambda(static_cast<std::size_t>(k));
      st.b(k) = m.switchover_mean(i) * lk;
      st.A(k, pi) += lk * r[i] / m.mu(p);
    }
    st.A(pi, pi) -= r[i];
    stages.push_back(std::move(st));
  }
  return stages;
}

/// Binomial-gated PE: a fraction r_i of the content found at the polling epoch is served at rate mu.
inline FluidPE fluid_pe_bgp(const SystemModel& m, const std::vector<double>& r, const SolverOptions& opt = {}) {
  require_valid(m, Bgp{r});
  Matrix q = detail::solve_balance(bgp_stages(m, r), "gated", opt);
  std::vector<double> busy;
  for (std::size_t i = 0; i < m.stage_count(); ++i) {
    const auto p = m.queue_at(i);
    busy.push_back(r[i] * q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) / m.mu(p));
  }
  return detail::finish_pe(m, Bgp{r}, std::move(q), std::move(busy));
}

inline std::vector<AffineStage> bsp_stages(const SystemModel& m, const std::vector<long>& y) {
  const auto K = static_cast<Eigen::Index>(m.queue_count());
  std::vector<AffineStage> stages;
  for (std::size_t i = 0; i < m.stage_count(); ++i) {
    const auto p = m.queue_at(i);
    const auto pi = static_cast<Eigen::Index>(p);
    const double drain = m.mu(p) - m.lambda(p);
    const double level = static_cast<double>(y[i]);
    AffineStage st{Matrix::Identity(K, K), Vector(K)};
    for (Eigen::Index k = 0; k < K; ++k) {
      const double lk = m.lambda(static_cast<std::size_t>(k));
      st.b(k) = m.switchover_mean(i) * lk - lk * level / drain;
      st.A(k, pi) = lk / drain;
    }
    st.A(pi, pi) = 0.0;
    st.b(pi) = m.switchover_mean(i) * m.lambda(p) + level;
    stages.push_back(std::move(st));
  }
  return stages;
}

/**
 * Base-stock PE. The balance equations assume every visit finds at least
 * Y_i; when the solution violates that, it is still returned with
 * `consistent` cleared.
 */
inline FluidPE fluid_pe_bsp(const SystemModel& m, const std::vector<long>& y, const SolverOptions& opt = {}) {
  require_valid(m, Bsp{y});
  Matrix q = detail::solve_balance(bsp_stages(m, y), "base-stock", opt);
  std::vector<double> busy;
  bool ok = true;
  for (std::size_t i = 0; i < m.stage_count(); ++i) {
    const auto p = m.queue_at(i);
    const double start = q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p));
    ok = ok && start >= static_cast<double>(y[i]) - 1e-9 * std::max(1.0, start);
    busy.push_back((start - static_cast<double>(y[i])) / (m.mu(p) - m.lambda(p)));
  }
  auto pe = detail::finish_pe(m, Bsp{y}, std::move(q), std::move(busy));
  pe.consistent = ok;
  return pe;
}

inline FluidPE fluid_pe(const SystemModel& m, const Policy& policy, const SolverOptions& opt = {}) {
  if (const auto* b = std::get_if<Bep>(&policy)) return fluid_pe_bep(m, b->r, opt);
  if (const auto* g = std::get_if<Bgp>(&policy)) return fluid_pe_bgp(m, g->r, opt);
  return fluid_pe_bsp(m, std::get<Bsp>(policy).y, opt);
}

inline AsymptoticApproximation approximate_moments(const FluidPE& pe, double n, int p) {
  if (p < 1) throw DomainError("moment order must be >= 1");
  if (!(n > 0.0)) throw DomainError("scale n must be > 0");
  AsymptoticApproximation out{n, p, (n * pe.q).array().pow(p).matrix(), {}};
  for (double b : pe.stage_busy) out.busy.push_back(std::pow(n * b, p));
  return out;
}

}  // namespace polling

#endif  // POLLING_FLUID_FLUID_HPP

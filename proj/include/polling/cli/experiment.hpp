// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_CLI_EXPERIMENT_HPP
#define POLLING_CLI_EXPERIMENT_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "polling/analysis/busy_period.hpp"
#include "polling/analysis/first_order.hpp"
#include "polling/analysis/second_order.hpp"
#include "polling/cli/csv.hpp"
#include "polling/error.hpp"
#include "polling/fluid/fluid.hpp"
#include "polling/model/system.hpp"
#include "polling/model/validate.hpp"
#include "polling/random.hpp"
#include "polling/sim/estimate.hpp"
#include "polling/sim/replications.hpp"

namespace polling {

struct ExperimentSpec {
  SystemModel model;
  Policy policy;
  std::vector<long> scales{1, 10, 100};
  std::vector<int> orders{1, 2, 3};
  std::size_t cycles = 2000;
  std::size_t warmup = 0;
  std::size_t reps = 1;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  BatchMeansOptions batch{};
};

enum class RowKind { queue, busy };

struct ComparisonRow {
  long n = 1;
  std::size_t stage = 0;
  RowKind kind = RowKind::queue;
  std::size_t queue = 0;  ///< meaningful for queue rows
  int p = 1;
  std::optional<double> analytic;
  double asymptotic = 0.0;
  MomentEstimate simulated;
  double abs_pct_diff = 0.0;
};

/// One row per (n, stage, queue or busy, p).
struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  void write_csv(std::ostream& os) const {
    csv::Writer w(os);
    w.row({"n", "stage", "kind", "queue", "p", "analytic", "asymptotic", "simulated", "ci_halfwidth", "batches",
           "abs_pct_diff"});
    for (const auto& r : rows)
      w.row({std::to_string(r.n), std::to_string(r.stage + 1), r.kind == RowKind::queue ? "queue" : "busy",
             r.kind == RowKind::queue ? std::to_string(r.queue + 1) : std::string(), std::to_string(r.p),
             csv::num(r.analytic), csv::num(r.asymptotic), csv::num(r.simulated.point),
             csv::num(r.simulated.ci_halfwidth), std::to_string(r.simulated.batches), csv::num(r.abs_pct_diff)});
  }

  /// Rows matching the given scale, kind and order.
  std::vector<const ComparisonRow*> select(long n, RowKind kind, int p) const {
    std::vector<const ComparisonRow*> out;
    for (const auto& r : rows)
      if (r.n == n && r.kind == kind && r.p == p) out.push_back(&r);
    return out;
  }
};

/// 100 |approx - sim| / max(sim, 1e-12).
inline double abs_pct_diff(double approx, double sim) { return 100.0 * std::abs(approx - sim) / std::max(sim, 1e-12); }

namespace detail {

/// Exact moments of the scaled system where a buffer-occupancy solution exists.
struct ExactMoments {
  std::optional<Matrix> q;
  std::optional<SecondMomentSolution> second;
  std::vector<double> busy_mean;
  std::vector<double> busy_second;
};

inline ExactMoments exact_moments(const SystemModel& m, const Policy& policy) {
  ExactMoments out;
  if (const auto* b = std::get_if<Bep>(&policy)) {
    const auto first = solve_first_order(m, b->r);
    out.q = first.q;
    out.second = solve_second_order(m, b->r, first);
    for (std::size_t i = 0; i < m.stage_count(); ++i) {
      const auto p = m.queue_at(i);
      const auto bp = busy_period_of(m, p);
      const double ri = b->r[i];
      const double qp = first.q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p));
      const double fpp = out.second->F[i](static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
      out.busy_mean.push_back(first.busy[i]);
      out.busy_second.push_back(fpp * ri * ri * bp.mean * bp.mean + qp * ri * bp.second);
    }
  } else if (const auto* g = std::get_if<Bgp>(&policy)) {
    const auto pe = fluid_pe_bgp(m, g->r);
    out.q = pe.q;
    out.busy_mean = pe.stage_busy;
  }
  return out;
}

inline std::optional<double> exact_queue(const ExactMoments& e, std::size_t i, std::size_t k, int p) {
  if (p == 1 && e.q) return (*e.q)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  if (p == 2 && e.second) return e.second->second_moment(i, k);
  return std::nullopt;
}

inline std::optional<double> exact_busy(const ExactMoments& e, std::size_t i, int p) {
  if (p == 1 && !e.busy_mean.empty()) return e.busy_mean[i];
  if (p == 2 && !e.busy_second.empty()) return e.busy_second[i];
  return std::nullopt;
}

}  // namespace detail

/// Seed of the run at scale n; a pure function of the base seed and n.
inline std::uint64_t scale_seed(std::uint64_t seed, long n) {
  return derive_seed(seed, 0x5ca1e000ULL + static_cast<std::uint64_t>(n));
}

/**
 * For each n: switchover means times n (and base-stock levels times n), start
 * at floor(n q(a_1)), simulate, and compare (n q)^p and (n b)^p with the
 * simulated moments and with exact values where a solver exists.
 */
inline ComparisonTable run_experiment(const ExperimentSpec& spec) {
  require_valid(spec.model, spec.policy);
  for (long n : spec.scales)
    if (n < 1) throw DomainError("scales must be >= 1");
  for (int p : spec.orders)
    if (p < 1) throw DomainError("orders must be >= 1");

  ComparisonTable table;
  if (spec.scales.empty()) return table;
  const auto pe = fluid_pe(spec.model, spec.policy);
  const auto I = spec.model.stage_count();
  const auto K = spec.model.queue_count();
  for (long n : spec.scales) {
    const double nd = static_cast<double>(n);
    const auto model_n = spec.model.with_scaled_switchovers(nd);
    const auto policy_n = scale_policy(spec.policy, n);
    const auto exact = detail::exact_moments(model_n, policy_n);
    ReplicationPlan plan;
    plan.reps = spec.reps;
    plan.cycles = spec.cycles;
    plan.warmup = spec.warmup;
    plan.base_seed = scale_seed(spec.seed, n);
    plan.initial = initial_state(Vector(pe.q.row(0).transpose()), nd);
    plan.threads = spec.threads;
    const auto samples = merge(run_replications(model_n, policy_n, plan));
    for (int p : spec.orders) {
      const auto approx = approximate_moments(pe, nd, p);
      const auto est = estimate_moments(samples, p, spec.batch);
      for (std::size_t i = 0; i < I; ++i) {
        for (std::size_t k = 0; k < K; ++k) {
          ComparisonRow row{n, i, RowKind::queue, k, p, detail::exact_queue(exact, i, k, p),
                            approx.queue(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)),
                            est.queue[i][k], 0.0};
          row.abs_pct_diff = abs_pct_diff(row.asymptotic, row.simulated.point);
          table.rows.push_back(row);
        }
        ComparisonRow row{n, i, RowKind::busy, 0, p, detail::exact_busy(exact, i, p), approx.busy[i], est.busy[i], 0.0};
        row.abs_pct_diff = abs_pct_diff(row.asymptotic, row.simulated.point);
        table.rows.push_back(row);
      }
    }
  }
  return table;
}

/// Mean absolute percentage difference over the selected rows.
inline double mean_abs_pct(const ComparisonTable& t, long n, RowKind kind, int p) {
  const auto rows = t.select(n, kind, p);
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto* r : rows) s += r->abs_pct_diff;
  return s / static_cast<double>(rows.size());
}

}  // namespace polling

#endif  // POLLING_CLI_EXPERIMENT_HPP

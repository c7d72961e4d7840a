// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_CLI_REPORT_HPP
#define POLLING_CLI_REPORT_HPP

#include <ostream>
#include <string>
#include <vector>

#include "polling/analysis/first_order.hpp"
#include "polling/analysis/second_order.hpp"
#include "polling/cli/csv.hpp"
#include "polling/error.hpp"
#include "polling/fluid/fluid.hpp"
#include "polling/model/system.hpp"
#include "polling/sim/estimate.hpp"
#include "polling/sim/simulator.hpp"

namespace polling {

/// Rows (stage, queue, q), 1-based.
inline void write_first_moments(std::ostream& os, const Matrix& q) {
  csv::Writer w(os);
  w.row({"stage", "queue", "q"});
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index k = 0; k < q.cols(); ++k)
      w.row({std::to_string(i + 1), std::to_string(k + 1), csv::num(q(i, k))});
}

/// Rows (stage, j, k, f), 1-based.
inline void write_second_moments(std::ostream& os, const SecondMomentSolution& sol) {
  csv::Writer w(os);
  w.row({"stage", "j", "k", "f"});
  for (std::size_t i = 0; i < sol.F.size(); ++i)
    for (Eigen::Index j = 0; j < sol.F[i].rows(); ++j)
      for (Eigen::Index k = 0; k < sol.F[i].cols(); ++k)
        w.row({std::to_string(i + 1), std::to_string(j + 1), std::to_string(k + 1), csv::num(sol.F[i](j, k))});
}

/**
 * Buffer-occupancy output for `order` 1 or 2. BEP only, except that the
 * gated first moments come from the gated balance equations.
 */
inline void solve_report(std::ostream& os, const SystemModel& m, const Policy& policy, int order) {
  if (order < 1 || order > 2)
    throw DomainError("solve supports orders 1 and 2; buffer-occupancy equations beyond second order are not built");
  if (const auto* b = std::get_if<Bep>(&policy)) {
    const auto first = solve_first_order(m, b->r);
    write_first_moments(os, first.q);
    if (order == 2) {
      os << '\n';
      write_second_moments(os, solve_second_order(m, b->r, first));
    }
    return;
  }
  if (const auto* g = std::get_if<Bgp>(&policy); g && order == 1) {
    write_first_moments(os, fluid_pe_bgp(m, g->r).q);
    return;
  }
  throw DomainError("solve: order " + std::to_string(order) + " is not available for policy " + policy_name(policy) +
                    " (use 'fluid pe' for its periodic equilibrium)");
}

/// Breakpoints (time, q_1..q_K) followed by a summary block.
inline void write_fluid_pe(std::ostream& os, const FluidPE& pe) {
  csv::Writer w(os);
  std::vector<std::string> head{"time"};
  for (Eigen::Index k = 0; k < pe.q.cols(); ++k) head.push_back("q_" + std::to_string(k + 1));
  w.row(head);
  for (const auto& b : pe.trajectory) {
    std::vector<std::string> cells{csv::num(b.time)};
    for (Eigen::Index k = 0; k < b.level.size(); ++k) cells.push_back(csv::num(b.level(k)));
    w.row(cells);
  }
  os << '\n';
  w.row({"policy", "period", "consistent"});
  w.row({policy_name(pe.policy), csv::num(pe.period), pe.consistent ? "true" : "false"});
  os << '\n';
  w.row({"stage", "busy", "switchover"});
  for (std::size_t i = 0; i < pe.stage_busy.size(); ++i)
    w.row({std::to_string(i + 1), csv::num(pe.stage_busy[i]), csv::num(pe.stage_switch[i])});
  os << '\n';
  write_first_moments(os, pe.q);
}

/// One block per policy: header, period, busy times and the PE q matrix, all scaled by n.
inline void compare_policies(std::ostream& os, const SystemModel& m, const std::vector<Policy>& policies, double n) {
  csv::Writer w(os);
  w.row({"block", "policy", "stage", "queue", "value_kind", "value"});
  for (std::size_t b = 0; b < policies.size(); ++b) {
    const auto pe = fluid_pe(m, policies[b]);
    const auto name = policy_name(policies[b]);
    const auto blk = std::to_string(b + 1);
    w.row({blk, name, "", "", "period", csv::num(n * pe.period)});
    w.row({blk, name, "", "", "consistent", pe.consistent ? "1" : "0"});
    for (std::size_t i = 0; i < pe.stage_busy.size(); ++i)
      w.row({blk, name, std::to_string(i + 1), "", "busy", csv::num(n * pe.stage_busy[i])});
    for (Eigen::Index i = 0; i < pe.q.rows(); ++i)
      for (Eigen::Index k = 0; k < pe.q.cols(); ++k)
        w.row({blk, name, std::to_string(i + 1), std::to_string(k + 1), "q", csv::num(n * pe.q(i, k))});
  }
}

/// Raw observations (replication, cycle, stage, queue, q_at_poll, busy_time).
inline void write_samples(std::ostream& os, const std::vector<StageSampleSet>& reps) {
  csv::Writer w(os);
  w.row({"replication", "cycle", "stage", "queue", "q_at_poll", "busy_time"});
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const auto& s = reps[r];
    for (std::size_t c = 0; c < s.observations(); ++c)
      for (std::size_t i = 0; i < s.stages; ++i)
        for (std::size_t k = 0; k < s.queues; ++k)
          w.row({std::to_string(r + 1), std::to_string(s.warmup + c + 1), std::to_string(i + 1), std::to_string(k + 1),
                 std::to_string(s.q(i, c, k)), csv::num(s.busy[i][c])});
  }
}

/// Estimates (stage, queue, p, estimate, ci_halfwidth); busy-time rows carry "busy" as the queue.
inline void write_summary(std::ostream& os, const StageSampleSet& s, const std::vector<int>& orders) {
  csv::Writer w(os);
  w.row({"stage", "queue", "p", "estimate", "ci_halfwidth"});
  for (int p : orders) {
    const auto t = estimate_moments(s, p);
    for (std::size_t i = 0; i < s.stages; ++i) {
      for (std::size_t k = 0; k < s.queues; ++k)
        w.row({std::to_string(i + 1), std::to_string(k + 1), std::to_string(p), csv::num(t.queue[i][k].point),
               csv::num(t.queue[i][k].ci_halfwidth)});
      w.row({std::to_string(i + 1), "busy", std::to_string(p), csv::num(t.busy[i].point),
             csv::num(t.busy[i].ci_halfwidth)});
    }
  }
}

}  // namespace polling

#endif  // POLLING_CLI_REPORT_HPP

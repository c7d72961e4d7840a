// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_SIM_REPLICATIONS_HPP
#define POLLING_SIM_REPLICATIONS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

#include "polling/error.hpp"
#include "polling/fluid/fluid.hpp"
#include "polling/model/system.hpp"
#include "polling/random.hpp"
#include "polling/sim/simulator.hpp"

namespace polling {

/// floor(n q) for an explicit first-epoch vector. Values within 1e-9 (relative)
/// below an integer count as that integer, so solver round-off cannot drop a customer.
inline std::vector<long> initial_state(const Vector& q_first, double n) {
  std::vector<long> out;
  for (Eigen::Index k = 0; k < q_first.size(); ++k) {
    const double v = n * q_first(k);
    out.push_back(static_cast<long>(std::floor(v + 1e-9 * std::max(1.0, std::abs(v)))));
  }
  return out;
}

/// floor(n q(a_1)) from the fluid point of the unscaled system.
inline std::vector<long> initial_state(const SystemModel& base, const Policy& base_policy, double n) {
  return initial_state(Vector(fluid_pe(base, base_policy).q.row(0).transpose()), n);
}

struct ReplicationPlan {
  std::size_t reps = 1;
  std::size_t cycles = 2000;
  std::size_t warmup = 0;
  std::uint64_t base_seed = 1;
  std::optional<std::vector<long>> initial;
  unsigned threads = 0;  ///< 0 picks the hardware concurrency
};

/**
 * Independent runs; replication r is seeded with derive_seed(base_seed, r)
 * and lands in slot r, so the output does not depend on scheduling or on the
 * number of worker threads.
 */
inline std::vector<StageSampleSet> run_replications(const SystemModel& m, const Policy& policy,
                                                    const ReplicationPlan& plan) {
  if (plan.reps < 1) throw DomainError("reps must be >= 1");
  std::vector<StageSampleSet> out(plan.reps);
  std::vector<std::exception_ptr> errors(plan.reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < plan.reps; r = next++) {
      try {
        out[r] = simulate(m, policy, plan.cycles, plan.warmup, derive_seed(plan.base_seed, r), plan.initial);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  unsigned hw = plan.threads ? plan.threads : std::max(1u, std::thread::hardware_concurrency());
  const auto n_threads = static_cast<unsigned>(std::min<std::size_t>(hw, plan.reps));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Concatenates replications in index order.
inline StageSampleSet merge(const std::vector<StageSampleSet>& parts) {
  if (parts.empty()) throw DomainError("nothing to merge");
  StageSampleSet out = parts.front();
  out.replications = parts.size();
  for (std::size_t r = 1; r < parts.size(); ++r) {
    const auto& p = parts[r];
    if (p.queues != out.queues || p.stages != out.stages) throw DomainError("replications have different shapes");
    for (std::size_t i = 0; i < out.stages; ++i) {
      out.q_at_poll[i].insert(out.q_at_poll[i].end(), p.q_at_poll[i].begin(), p.q_at_poll[i].end());
      out.busy[i].insert(out.busy[i].end(), p.busy[i].begin(), p.busy[i].end());
    }
    out.cycle_lengths.insert(out.cycle_lengths.end(), p.cycle_lengths.begin(), p.cycle_lengths.end());
    out.observed_time += p.observed_time;
    out.serving_time += p.serving_time;
    detail::fnv_mix(out.trace_hash, p.trace_hash);
  }
  return out;
}

}  // namespace polling

#endif  // POLLING_SIM_REPLICATIONS_HPP

// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_SIM_SIMULATOR_HPP
#define POLLING_SIM_SIMULATOR_HPP

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "polling/error.hpp"
#include "polling/model/system.hpp"
#include "polling/model/validate.hpp"
#include "polling/random.hpp"

namespace polling {

/// Observations at the polling and departure epochs of every stage.
struct StageSampleSet {
  std::size_t queues = 0;
  std::size_t stages = 0;
  std::uint64_t seed = 0;
  std::size_t warmup = 0;
  std::size_t replications = 1;
  /// q_at_poll[i] holds K entries per recorded cycle, cycle-major.
  std::vector<std::vector<long>> q_at_poll;
  std::vector<std::vector<double>> busy;
  std::vector<double> cycle_lengths;
  double observed_time = 0.0;  ///< length of the recorded horizon
  double serving_time = 0.0;   ///< part of it spent serving
  std::uint64_t trace_hash = 0;

  std::size_t observations() const { return cycle_lengths.size(); }

  long q(std::size_t stage, std::size_t cycle, std::size_t queue) const {
    return q_at_poll[stage][cycle * queues + queue];
  }
};

/**
 * Mutable simulator state: clock, queue contents and the next Poisson
 * arrival per queue. `advance` moves the clock over an activity of the given
 * length and admits every arrival strictly before its end, so a departure at
 * the same instant as an arrival is always processed first.
 */
class SimState {
 public:
  SimState(const SystemModel& m, std::uint64_t seed, const std::vector<long>& initial)
      : model_(&m), rng_(splitmix64(seed)), queue_(initial) {
    next_arrival_.resize(m.queue_count());
    for (std::size_t k = 0; k < m.queue_count(); ++k) next_arrival_[k] = interarrival(k);
  }

  double clock() const { return clock_; }
  long queue(std::size_t k) const { return queue_[k]; }
  const std::vector<long>& queues() const { return queue_; }
  Engine& rng() { return rng_; }

  void advance(double duration) {
    const double end = clock_ + duration;
    for (std::size_t k = 0; k < queue_.size(); ++k) {
      while (next_arrival_[k] < end) {
        ++queue_[k];
        next_arrival_[k] += interarrival(k);
      }
    }
    clock_ = end;
  }

  /// One service at queue k: the customer leaves when the service completes.
  void serve_one(std::size_t k) {
    advance(model_->service(k).sample(rng_));
    --queue_[k];
  }

 private:
  double interarrival(std::size_t k) { return -std::log(uniform01(rng_)) / model_->lambda(k); }

  const SystemModel* model_;
  Engine rng_;
  double clock_ = 0.0;
  std::vector<long> queue_;
  std::vector<double> next_arrival_;
};

namespace detail {

constexpr std::uint64_t fnv_offset = 0xcbf29ce484222325ULL;

inline void fnv_mix(std::uint64_t& h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
}

/// Runs the visit at `stage` and returns its length.
inline double run_visit(const SystemModel& m, const Policy& policy, std::size_t stage, SimState& st) {
  const auto p = m.queue_at(stage);
  const double start = st.clock();
  const long n = st.queue(p);
  std::visit(
      [&](const auto& pol) {
        using P = std::decay_t<decltype(pol)>;
        if constexpr (std::is_same_v<P, Bep>) {
          const long target = n - binomial(st.rng(), n, pol.r[stage]);
          while (st.queue(p) > target) st.serve_one(p);
        } else if constexpr (std::is_same_v<P, Bgp>) {
          const long count = binomial(st.rng(), n, pol.r[stage]);
          for (long c = 0; c < count; ++c) st.serve_one(p);
        } else {
          const long level = pol.y[stage];
          while (st.queue(p) > level) st.serve_one(p);
        }
      },
      policy);
  return st.clock() - start;
}

}  // namespace detail

/**
 * Simulates `cycles` full cycles from the polling epoch of stage 1, starting
 * with `initial` customers (empty by default), and records every cycle after
 * the first `warmup`. Identical arguments give bit-identical output.
 */
inline StageSampleSet simulate(const SystemModel& m, const Policy& policy, std::size_t cycles, std::size_t warmup,
                               std::uint64_t seed, const std::optional<std::vector<long>>& initial = std::nullopt) {
  require_valid(m, policy);
  if (cycles <= warmup) throw DomainError("cycles must exceed warmup");
  const auto K = m.queue_count();
  const auto I = m.stage_count();
  std::vector<long> start(K, 0);
  if (initial) {
    if (initial->size() != K) throw DomainError("initial state needs one entry per queue");
    for (long v : *initial)
      if (v < 0) throw DomainError("initial queue lengths must be >= 0");
    start = *initial;
  }

  StageSampleSet out;
  out.queues = K;
  out.stages = I;
  out.seed = seed;
  out.warmup = warmup;
  out.q_at_poll.assign(I, {});
  out.busy.assign(I, {});
  const std::size_t kept = cycles - warmup;
  for (std::size_t i = 0; i < I; ++i) {
    out.q_at_poll[i].reserve(kept * K);
    out.busy[i].reserve(kept);
  }
  out.cycle_lengths.reserve(kept);

  SimState st(m, seed, start);
  std::uint64_t h = detail::fnv_offset;
  for (std::size_t c = 0; c < cycles; ++c) {
    const bool record = c >= warmup;
    const double cycle_start = st.clock();
    for (std::size_t i = 0; i < I; ++i) {
      detail::fnv_mix(h, i);
      detail::fnv_mix(h, std::bit_cast<std::uint64_t>(st.clock()));
      for (long v : st.queues()) detail::fnv_mix(h, static_cast<std::uint64_t>(v));
      if (record)
        out.q_at_poll[i].insert(out.q_at_poll[i].end(), st.queues().begin(), st.queues().end());
      const double b = detail::run_visit(m, policy, i, st);
      detail::fnv_mix(h, std::bit_cast<std::uint64_t>(st.clock()));
      if (record) {
        out.busy[i].push_back(b);
        out.serving_time += b;
      }
      st.advance(m.switchover(i).sample(st.rng()));
    }
    if (record) {
      out.cycle_lengths.push_back(st.clock() - cycle_start);
      out.observed_time += st.clock() - cycle_start;
    }
  }
  out.trace_hash = h;
  return out;
}

}  // namespace polling

#endif  // POLLING_SIM_SIMULATOR_HPP

// SPDX-License-Identifier: Apache-2.0
// Shared model builders for the test binaries.
#ifndef POLLING_TESTS_FIXTURES_HPP
#define POLLING_TESTS_FIXTURES_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "polling/model/system.hpp"

namespace polling::testing {

inline SystemModel five_stage_model() {
  const auto svc = DistributionSpec::exponential(8.0);
  return SystemModel({2.0, 2.0, 2.0}, {svc, svc, svc},
                     std::vector<DistributionSpec>(5, DistributionSpec::deterministic(2.0)),
                     PollingTable::from_one_based({1, 2, 3, 2, 3}));
}

inline std::vector<double> five_stage_r() { return {1.0, 0.6, 1.0, 1.0, 0.4}; }
inline std::vector<long> five_stage_y() { return {0, 6, 0, 0, 4}; }

inline SystemModel two_queue_cyclic() {
  const auto svc = DistributionSpec::exponential(4.0);
  return SystemModel({1.0, 1.0}, {svc, svc}, {DistributionSpec::deterministic(1.0), DistributionSpec::deterministic(1.0)},
                     PollingTable::cyclic(2));
}

inline SystemModel single_queue(double lambda = 1.0) {
  return SystemModel({lambda}, {DistributionSpec::exponential(4.0)}, {DistributionSpec::deterministic(1.0)},
                     PollingTable::cyclic(1));
}

inline DistributionSpec random_spec(std::mt19937_64& g, double mean) {
  switch (std::uniform_int_distribution<int>(0, 3)(g)) {
    case 0: return DistributionSpec::deterministic(mean);
    case 1: return DistributionSpec::exponential(1.0 / mean);
    case 2: {
      const int shape = std::uniform_int_distribution<int>(1, 4)(g);
      return DistributionSpec::erlang(shape, shape / mean);
    }
    default: {
      const double half = std::uniform_real_distribution<double>(0.1, 0.9)(g) * mean;
      return DistributionSpec::uniform(mean - half, mean + half);
    }
  }
}

/// Random stable model; cyclic when `cyclic`, otherwise a random table that visits every queue.
inline SystemModel random_model(std::mt19937_64& g, std::size_t K, bool cyclic, double max_rho = 0.9) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> share(K);
  double total = 0.0;
  for (auto& s : share) total += (s = u(g));
  const double rho = std::uniform_real_distribution<double>(0.1, max_rho)(g);
  std::vector<double> lambda(K);
  std::vector<DistributionSpec> svc;
  for (std::size_t k = 0; k < K; ++k) {
    const double mean = std::uniform_real_distribution<double>(0.1, 1.0)(g);
    lambda[k] = rho * share[k] / total / mean;
    svc.push_back(random_spec(g, mean));
  }
  std::vector<std::size_t> table;
  for (std::size_t k = 0; k < K; ++k) table.push_back(k);
  if (!cyclic) {
    const std::size_t extra = std::uniform_int_distribution<std::size_t>(1, K)(g);
    for (std::size_t e = 0; e < extra; ++e) table.push_back(std::uniform_int_distribution<std::size_t>(0, K - 1)(g));
    std::shuffle(table.begin(), table.end(), g);
  }
  std::vector<DistributionSpec> sw;
  for (std::size_t i = 0; i < table.size(); ++i) sw.push_back(random_spec(g, u(g) * 2.0));
  return SystemModel(lambda, svc, sw, PollingTable(table));
}

/// Random admissible BEP vector: every queue keeps at least one stage with r > 0.
inline std::vector<double> random_r(std::mt19937_64& g, const SystemModel& m, bool all_positive = false) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> r(m.stage_count());
  for (auto& x : r) x = (!all_positive && std::bernoulli_distribution(0.2)(g)) ? 0.0 : u(g);
  for (std::size_t k = 0; k < m.queue_count(); ++k) {
    bool any = false;
    for (std::size_t i = 0; i < r.size(); ++i) any = any || (m.queue_at(i) == k && r[i] > 0.0);
    if (!any)
      for (std::size_t i = 0; i < r.size(); ++i)
        if (m.queue_at(i) == k) {
          r[i] = u(g);
          break;
        }
  }
  return r;
}

}  // namespace polling::testing

#endif  // POLLING_TESTS_FIXTURES_HPP

// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_ANALYSIS_BUSY_PERIOD_HPP
#define POLLING_ANALYSIS_BUSY_PERIOD_HPP

#include <string>

#include "polling/error.hpp"
#include "polling/model/distribution.hpp"
#include "polling/model/system.hpp"

namespace polling {

/// First two moments of the M/G/1 busy period started by a single customer.
struct BusyPeriodMoments {
  double mean = 0.0;
  double second = 0.0;
};

inline BusyPeriodMoments mg1_busy_period_moments(double lambda, const DistributionSpec& service) {
  const double load = lambda * service.mean();
  if (!(load < 1.0))
    throw DomainError("busy period is not proper: lambda * E[S] = " + std::to_string(load) + " >= 1");
  const double gap = 1.0 - load;
  return {service.mean() / gap, service.second_moment() / (gap * gap * gap)};
}

inline BusyPeriodMoments busy_period_of(const SystemModel& m, std::size_t k) {
  return mg1_busy_period_moments(m.lambda(k), m.service(k));
}

}  // namespace polling

#endif  // POLLING_ANALYSIS_BUSY_PERIOD_HPP

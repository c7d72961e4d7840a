// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_MODEL_SYSTEM_HPP
#define POLLING_MODEL_SYSTEM_HPP

#include <cstddef>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "polling/error.hpp"
#include "polling/model/distribution.hpp"
#include "polling/model/polling_table.hpp"

namespace polling {

/**
 * Single-server polling system: K queues with Poisson arrivals and general
 * service, served in the order given by a polling table with a switchover
 * after every stage. The constructor only enforces structural consistency
 * (vector sizes); stability and the like are checked by `validate`.
 */
class SystemModel {
 public:
  SystemModel(std::vector<double> lambda, std::vector<DistributionSpec> service,
              std::vector<DistributionSpec> switchover, PollingTable table)
      : lambda_(std::move(lambda)),
        service_(std::move(service)),
        switchover_(std::move(switchover)),
        table_(std::move(table)) {
    if (lambda_.empty()) throw DomainError("model needs at least one queue");
    if (service_.size() != lambda_.size())
      throw DomainError("one service distribution per queue expected");
    if (switchover_.size() != table_.stage_count())
      throw DomainError("one switchover distribution per stage expected");
    if (table_.queue_count() > lambda_.size())
      throw DomainError("polling table refers to queue " + std::to_string(table_.queue_count()) +
                        " but the model has " + std::to_string(lambda_.size()) + " queues");
  }

  std::size_t queue_count() const { return lambda_.size(); }
  std::size_t stage_count() const { return table_.stage_count(); }

  double lambda(std::size_t k) const { return lambda_[k]; }
  const std::vector<double>& lambdas() const { return lambda_; }
  const DistributionSpec& service(std::size_t k) const { return service_[k]; }
  const std::vector<DistributionSpec>& services() const { return service_; }
  const DistributionSpec& switchover(std::size_t i) const { return switchover_[i]; }
  const std::vector<DistributionSpec>& switchovers() const { return switchover_; }
  const PollingTable& table() const { return table_; }

  /// Queue served at stage i.
  std::size_t queue_at(std::size_t i) const { return table_.queue_of(i); }

  double mu(std::size_t k) const { return 1.0 / service_[k].mean(); }
  double rho(std::size_t k) const { return lambda_[k] * service_[k].mean(); }

  double total_rho() const {
    double r = 0.0;
    for (std::size_t k = 0; k < queue_count(); ++k) r += rho(k);
    return r;
  }

  double switchover_mean(std::size_t i) const { return switchover_[i].mean(); }

  double total_switchover() const {
    double s = 0.0;
    for (const auto& v : switchover_) s += v.mean();
    return s;
  }

  /// Mean cycle length s / (1 - rho).
  double cycle_length() const { return total_switchover() / (1.0 - total_rho()); }

  /// Copy with every switchover mean multiplied by n (family preserved).
  SystemModel with_scaled_switchovers(double n) const {
    std::vector<DistributionSpec> v;
    v.reserve(switchover_.size());
    for (const auto& d : switchover_) v.push_back(d.is_zero() ? d : d.scaled(n));
    return SystemModel(lambda_, service_, std::move(v), table_);
  }

 private:
  std::vector<double> lambda_;
  std::vector<DistributionSpec> service_;
  std::vector<DistributionSpec> switchover_;
  PollingTable table_;
};

struct Bep {
  std::vector<double> r;
};

struct Bgp {
  std::vector<double> r;
};

struct Bsp {
  std::vector<long> y;
};

/// Service control at each stage: binomial-exhaustive, binomial-gated or base-stock.
using Policy = std::variant<Bep, Bgp, Bsp>;

inline std::string policy_name(const Policy& p) {
  switch (p.index()) {
    case 0: return "bep";
    case 1: return "bgp";
    default: return "bsp";
  }
}

/// Base-stock levels multiply by n under the large-switchover scaling; BEP/BGP are unchanged.
inline Policy scale_policy(const Policy& p, long n) {
  if (const auto* b = std::get_if<Bsp>(&p)) {
    Bsp out = *b;
    for (auto& y : out.y) y *= n;
    return out;
  }
  return p;
}

}  // namespace polling

#endif  // POLLING_MODEL_SYSTEM_HPP

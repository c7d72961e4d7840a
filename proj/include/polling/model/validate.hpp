// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_MODEL_VALIDATE_HPP
#define POLLING_MODEL_VALIDATE_HPP

#include <cmath>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "polling/error.hpp"
#include "polling/model/system.hpp"

namespace polling {

enum class ViolationKind {
  unvisited_queue,
  nonpositive_rate,
  nonpositive_service_mean,
  nonpositive_load,
  unstable,
  zero_total_switchover,
  policy_size,
  probability_range,
  queue_never_served,
  negative_base_stock,
};

struct Violation {
  ViolationKind kind;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  bool contains(ViolationKind kind) const {
    for (const auto& v : violations)
      if (v.kind == kind) return true;
    return false;
  }

  std::string summary() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += v.message;
    }
    return out;
  }

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

namespace detail {

inline void check_probabilities(const SystemModel& model, const std::vector<double>& r,
                                ValidationReport& rep) {
  const auto I = model.stage_count();
  if (r.size() != I) {
    rep.violations.push_back({ViolationKind::policy_size, "policy needs " + std::to_string(I) +
                                                              " stage probabilities, got " +
                                                              std::to_string(r.size())});
    return;
  }
  for (std::size_t i = 0; i < I; ++i)
    if (!(r[i] >= 0.0 && r[i] <= 1.0))
      rep.violations.push_back({ViolationKind::probability_range,
                                "r at stage " + std::to_string(i + 1) + " must lie in [0,1]"});
  for (std::size_t k = 0; k < model.queue_count(); ++k) {
    double total = 0.0;
    for (std::size_t i = 0; i < I; ++i)
      if (model.queue_at(i) == k && r[i] > 0.0) total += r[i];
    if (!(total > 0.0))
      rep.violations.push_back({ViolationKind::queue_never_served,
                                "queue " + std::to_string(k + 1) + " has zero total service probability"});
  }
}

}  // namespace detail

/// Lists every violated admissibility condition; an empty report means all
/// solvers and the simulator accept the pair.
inline ValidationReport validate(const SystemModel& model, const Policy& policy) {
  ValidationReport rep;
  const auto K = model.queue_count();
  for (auto q : model.table().unvisited(K))
    rep.violations.push_back({ViolationKind::unvisited_queue,
                              "queue " + std::to_string(q + 1) + " does not appear in the polling table"});

  bool loads_ok = true;
  for (std::size_t k = 0; k < K; ++k) {
    if (!(model.lambda(k) > 0.0) || !std::isfinite(model.lambda(k))) {
      rep.violations.push_back({ViolationKind::nonpositive_rate,
                                "arrival rate of queue " + std::to_string(k + 1) + " must be > 0"});
      loads_ok = false;
    }
    if (!(model.service(k).mean() > 0.0)) {
      rep.violations.push_back({ViolationKind::nonpositive_service_mean,
                                "service mean of queue " + std::to_string(k + 1) + " must be > 0"});
      loads_ok = false;
    }
  }
  if (loads_ok) {
    for (std::size_t k = 0; k < K; ++k)
      if (!(model.rho(k) > 0.0))
        rep.violations.push_back({ViolationKind::nonpositive_load,
                                  "load of queue " + std::to_string(k + 1) + " must be > 0"});
    const double rho = model.total_rho();
    if (!(rho < 1.0))
      rep.violations.push_back({ViolationKind::unstable, "total load rho = " + std::to_string(rho) +
                                                             " must be < 1"});
  }
  if (!(model.total_switchover() > 0.0))
    rep.violations.push_back({ViolationKind::zero_total_switchover, "total mean switchover must be > 0"});

  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Bsp>) {
          if (p.y.size() != model.stage_count()) {
            rep.violations.push_back({ViolationKind::policy_size,
                                      "policy needs " + std::to_string(model.stage_count()) +
                                          " base-stock levels, got " + std::to_string(p.y.size())});
            return;
          }
          for (std::size_t i = 0; i < p.y.size(); ++i)
            if (p.y[i] < 0)
              rep.violations.push_back({ViolationKind::negative_base_stock,
                                        "base-stock level at stage " + std::to_string(i + 1) + " must be >= 0"});
        } else {
          detail::check_probabilities(model, p.r, rep);
        }
      },
      policy);
  return rep;
}

/// Throws ValidationError carrying the report summary when the pair is inadmissible.
inline void require_valid(const SystemModel& model, const Policy& policy) {
  const auto rep = validate(model, policy);
  if (!rep.ok()) throw ValidationError(rep.summary());
}

}  // namespace polling

#endif  // POLLING_MODEL_VALIDATE_HPP

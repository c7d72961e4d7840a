// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_MODEL_POLLING_TABLE_HPP
#define POLLING_MODEL_POLLING_TABLE_HPP

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "polling/error.hpp"

namespace polling {

/**
 * Maps each of I stages to the queue the server visits there. Indices are
 * 0-based in code; `from_one_based` / `to_one_based` translate the 1-based
 * numbering used in configuration files and CSV output.
 */
class PollingTable {
 public:
  PollingTable() = default;

  explicit PollingTable(std::vector<std::size_t> stage_to_queue) : map_(std::move(stage_to_queue)) {
    if (map_.empty()) throw DomainError("polling table needs at least one stage");
    queues_ = *std::max_element(map_.begin(), map_.end()) + 1;
  }

  static PollingTable from_one_based(const std::vector<long>& stages) {
    std::vector<std::size_t> m;
    m.reserve(stages.size());
    for (long q : stages) {
      if (q < 1) throw DomainError("queue indices in a polling table are 1-based; got " + std::to_string(q));
      m.push_back(static_cast<std::size_t>(q - 1));
    }
    return PollingTable(std::move(m));
  }

  static PollingTable cyclic(std::size_t queues) {
    std::vector<std::size_t> m(queues);
    for (std::size_t k = 0; k < queues; ++k) m[k] = k;
    return PollingTable(std::move(m));
  }

  std::size_t stage_count() const { return map_.size(); }
  /// Number of queues implied by the largest index in the table.
  std::size_t queue_count() const { return queues_; }
  std::size_t queue_of(std::size_t stage) const { return map_.at(stage); }
  const std::vector<std::size_t>& stages() const { return map_; }

  std::vector<long> to_one_based() const {
    std::vector<long> out;
    for (auto q : map_) out.push_back(static_cast<long>(q) + 1);
    return out;
  }

  /// Stage index `j` stages before `stage`, cyclically (j = 0 is `stage` itself).
  std::size_t lookback(std::size_t stage, std::size_t j) const {
    const std::size_t n = map_.size();
    return (stage + n - j % n) % n;
  }

  /// Stage following `stage` in the table.
  std::size_t next(std::size_t stage) const { return (stage + 1) % map_.size(); }

  bool is_cyclic() const {
    if (map_.size() != queues_) return false;
    for (std::size_t i = 0; i < map_.size(); ++i)
      if (map_[i] != i) return false;
    return true;
  }

  /// Queues in [0, k) that never appear in the table.
  std::vector<std::size_t> unvisited(std::size_t k) const {
    std::vector<std::size_t> out;
    for (std::size_t q = 0; q < k; ++q)
      if (std::find(map_.begin(), map_.end(), q) == map_.end()) out.push_back(q);
    return out;
  }

  friend bool operator==(const PollingTable&, const PollingTable&) = default;

 private:
  std::vector<std::size_t> map_;
  std::size_t queues_ = 0;
};

}  // namespace polling

#endif  // POLLING_MODEL_POLLING_TABLE_HPP

// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_MODEL_CONFIG_HPP
#define POLLING_MODEL_CONFIG_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "polling/error.hpp"
#include "polling/model/system.hpp"

namespace polling {

/// Parsed configuration file: the model and (optionally) its policy.
struct Config {
  SystemModel model;
  std::optional<Policy> policy;
};

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

inline double require_number(const json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

inline DistributionSpec parse_distribution(const json& j, const std::string& where) {
  const auto& fam = require(j, "family", where);
  if (!fam.is_string()) throw ConfigError(where + ".family: expected a string");
  const auto family = fam.get<std::string>();
  const auto& params = require(j, "params", where);
  const std::string pw = where + ".params";
  try {
    if (family == "deterministic") return DistributionSpec::deterministic(require_number(params, "value", pw));
    if (family == "exponential") return DistributionSpec::exponential(require_number(params, "rate", pw));
    if (family == "erlang") {
      const double shape = require_number(params, "shape", pw);
      if (shape != static_cast<int>(shape)) throw ConfigError(pw + ".shape: expected an integer");
      return DistributionSpec::erlang(static_cast<int>(shape), require_number(params, "rate", pw));
    }
    if (family == "uniform")
      return DistributionSpec::uniform(require_number(params, "lower", pw), require_number(params, "upper", pw));
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ".family: unknown family '" + family +
                    "' (expected deterministic, exponential, erlang or uniform)");
}

inline json dump_distribution(const DistributionSpec& d) {
  json params;
  switch (d.family()) {
    case Family::deterministic: params = {{"value", d.param1()}}; break;
    case Family::exponential: params = {{"rate", d.param1()}}; break;
    case Family::erlang: params = {{"shape", d.shape()}, {"rate", d.param1()}}; break;
    case Family::uniform: params = {{"lower", d.param1()}, {"upper", d.param2()}}; break;
  }
  return {{"family", std::string(to_string(d.family()))}, {"params", params}};
}

template <class T>
std::vector<T> number_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected a list");
  std::vector<T> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(where + ": expected numbers");
    out.push_back(e.get<T>());
  }
  return out;
}

inline Policy parse_policy(const json& j) {
  const auto& kind_j = require(j, "kind", "policy");
  if (!kind_j.is_string()) throw ConfigError("policy.kind: expected a string");
  const auto kind = kind_j.get<std::string>();
  if (kind == "bep") return Bep{number_list<double>(require(j, "r", "policy"), "policy.r")};
  if (kind == "bgp") return Bgp{number_list<double>(require(j, "r", "policy"), "policy.r")};
  if (kind == "bsp") {
    const auto& yj = require(j, "y", "policy");
    for (const auto& e : yj)
      if (!e.is_number_integer()) throw ConfigError("policy.y: base-stock levels must be integers");
    return Bsp{number_list<long>(yj, "policy.y")};
  }
  throw ConfigError("policy.kind: unknown policy '" + kind + "' (expected bep, bgp or bsp)");
}

}  // namespace detail

inline nlohmann::json policy_to_json(const Policy& p) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using P = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<P, Bep>) return {{"kind", "bep"}, {"r", v.r}};
        else if constexpr (std::is_same_v<P, Bgp>) return {{"kind", "bgp"}, {"r", v.r}};
        else return {{"kind", "bsp"}, {"y", v.y}};
      },
      p);
}

inline Policy policy_from_json(const nlohmann::json& j) {
  try {
    return detail::parse_policy(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("policy: ") + e.what());
  }
}

inline Config config_from_json(const nlohmann::json& root) {
  using detail::require;
  try {
    const auto& queues = require(root, "queues", "config");
    if (!queues.is_array() || queues.empty()) throw ConfigError("queues: expected a non-empty list");
    std::vector<double> lambda;
    std::vector<DistributionSpec> service;
    for (std::size_t k = 0; k < queues.size(); ++k) {
      const std::string where = "queues[" + std::to_string(k) + "]";
      lambda.push_back(detail::require_number(queues[k], "lambda", where));
      service.push_back(detail::parse_distribution(require(queues[k], "service", where), where + ".service"));
    }
    const auto table_list = detail::number_list<long>(require(root, "table", "config"), "table");
    const auto& sw = require(root, "switchover", "config");
    if (!sw.is_array()) throw ConfigError("switchover: expected a list");
    std::vector<DistributionSpec> switchover;
    for (std::size_t i = 0; i < sw.size(); ++i)
      switchover.push_back(detail::parse_distribution(sw[i], "switchover[" + std::to_string(i) + "]"));

    PollingTable table;
    try {
      table = PollingTable::from_one_based(table_list);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("table: ") + e.what());
    }
    std::optional<Policy> policy;
    if (root.contains("policy")) policy = detail::parse_policy(root.at("policy"));
    try {
      return Config{SystemModel(std::move(lambda), std::move(service), std::move(switchover), std::move(table)),
                    std::move(policy)};
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline nlohmann::json config_to_json(const SystemModel& model, const std::optional<Policy>& policy) {
  nlohmann::json root;
  root["queues"] = nlohmann::json::array();
  for (std::size_t k = 0; k < model.queue_count(); ++k)
    root["queues"].push_back({{"lambda", model.lambda(k)}, {"service", detail::dump_distribution(model.service(k))}});
  root["table"] = model.table().to_one_based();
  root["switchover"] = nlohmann::json::array();
  for (const auto& v : model.switchovers()) root["switchover"].push_back(detail::dump_distribution(v));
  if (policy) root["policy"] = policy_to_json(*policy);
  return root;
}

inline Config parse_config(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(root);
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace polling

#endif  // POLLING_MODEL_CONFIG_HPP

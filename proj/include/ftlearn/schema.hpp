#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ftlearn/dataset.hpp"
#include "ftlearn/errors.hpp"

namespace ftlearn {

/// Optional "learner" section of a schema file; unset fields keep the
/// built-in defaults, and command line flags override both.
struct LearnerDefaults {
  std::optional<int> max_inputs;
  std::optional<double> min_top_significance;
  std::optional<Statistic> statistic;
  std::optional<std::uint64_t> random_seed;
};

/**
 * Declares how a CSV file maps onto a Dataset: key columns, sensor columns
 * with their daily statistic, failure columns, and optional per-column
 * plausibility ranges used to drop corrupt records.
 */
struct SchemaConfig {
  std::string unit_column;
  std::string date_column;
  std::vector<std::pair<std::string, Statistic>> sensor_columns;
  std::vector<std::string> failure_columns;
  std::map<std::string, std::pair<double, double>> plausibility_ranges;
  LearnerDefaults learner;

  void check() const {
    if (unit_column.empty()) throw SchemaError("unit_column must be set");
    if (date_column.empty()) throw SchemaError("date_column must be set");
    std::unordered_set<std::string> sensor_names;
    for (const auto& [name, st] : sensor_columns) {
      (void)st;
      if (!sensor_names.insert(name).second)
        throw SchemaError("duplicate sensor column '" + name + "'");
    }
    std::unordered_set<std::string> failure_names;
    for (const auto& name : failure_columns) {
      if (sensor_names.count(name))
        throw SchemaError("column '" + name + "' listed as both sensor and failure");
      if (!failure_names.insert(name).second)
        throw SchemaError("duplicate failure column '" + name + "'");
    }
    for (const auto& [name, range] : plausibility_ranges) {
      if (!(range.first < range.second))
        throw SchemaError("plausibility range for '" + name +
                          "' must satisfy lo < hi");
    }
  }
};

inline SchemaConfig schema_from_json(const nlohmann::json& j) {
  SchemaConfig cfg;
  try {
    cfg.unit_column = j.at("unit_column").get<std::string>();
    cfg.date_column = j.at("date_column").get<std::string>();
    for (const auto& item : j.at("sensor_columns")) {
      cfg.sensor_columns.emplace_back(
          item.at("name").get<std::string>(),
          statistic_from_string(item.at("statistic").get<std::string>()));
    }
    for (const auto& item : j.at("failure_columns"))
      cfg.failure_columns.push_back(item.get<std::string>());
    if (j.contains("plausibility_ranges")) {
      for (const auto& [name, range] : j.at("plausibility_ranges").items()) {
        if (!range.is_array() || range.size() != 2)
          throw SchemaError("plausibility range for '" + name + "' must be [lo, hi]");
        cfg.plausibility_ranges[name] = {range[0].get<double>(), range[1].get<double>()};
      }
    }
    if (j.contains("learner")) {
      const auto& jl = j.at("learner");
      if (jl.contains("max_inputs"))
        cfg.learner.max_inputs = jl.at("max_inputs").get<int>();
      if (jl.contains("min_top_significance"))
        cfg.learner.min_top_significance = jl.at("min_top_significance").get<double>();
      if (jl.contains("statistic"))
        cfg.learner.statistic =
            statistic_from_string(jl.at("statistic").get<std::string>());
      if (jl.contains("random_seed"))
        cfg.learner.random_seed = jl.at("random_seed").get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bad schema document: ") + e.what());
  }
  cfg.check();
  return cfg;
}

inline SchemaConfig load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("schema '" + path + "': " + e.what());
  }
  return schema_from_json(j);
}

}  // namespace ftlearn

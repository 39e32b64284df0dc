#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ftlearn/dataset.hpp"
#include "ftlearn/detail/csv.hpp"
#include "ftlearn/errors.hpp"
#include "ftlearn/schema.hpp"

namespace ftlearn {

/**
 * Per-failure dataset where every failure record is paired with the same
 * unit's most recent earlier normal record. Rows are interleaved
 * (failure, counterpart, failure, counterpart, ...) in the failure rows'
 * original order; a reused counterpart is materialized once per pair.
 */
struct BalancedDataset {
  Dataset base;  // all sensor columns plus the single failure column
  std::vector<std::pair<std::size_t, std::size_t>> pairing;  // (failure row, normal row)
  std::size_t dropped_failures = 0;  // failure rows with no earlier normal record
  std::string failure_name;
};

inline Dataset load_csv(const std::string& path, const SchemaConfig& schema) {
  schema.check();
  const auto rows = detail::read_csv(path);
  if (rows.empty()) throw ParseError(path + ": empty file (missing header row)");
  const auto& header = rows.front();

  std::unordered_map<std::string_view, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index.emplace(header[i], i);

  auto require = [&](const std::string& name) {
    auto it = col_index.find(name);
    if (it == col_index.end())
      throw SchemaError(path + ": missing required column '" + name + "'");
    return it->second;
  };

  const std::size_t unit_idx = require(schema.unit_column);
  const std::size_t date_idx = require(schema.date_column);
  std::vector<std::size_t> sensor_idx;
  for (const auto& [name, st] : schema.sensor_columns) {
    (void)st;
    sensor_idx.push_back(require(name));
  }
  std::vector<std::size_t> failure_idx;
  for (const auto& name : schema.failure_columns) failure_idx.push_back(require(name));

  const std::size_t n = rows.size() - 1;
  std::vector<RecordKey> keys;
  keys.reserve(n);
  std::vector<SensorColumn> sensors;
  for (const auto& [name, st] : schema.sensor_columns) {
    SensorColumn col{name, st, {}};
    col.values.reserve(n);
    sensors.push_back(std::move(col));
  }
  std::vector<FailureColumn> failures;
  for (const auto& name : schema.failure_columns) {
    FailureColumn col{name, {}};
    col.values.reserve(n);
    failures.push_back(std::move(col));
  }

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw ParseError(path + ": row " + std::to_string(r + 1) + " has " +
                       std::to_string(row.size()) + " fields, header has " +
                       std::to_string(header.size()));
    Date date;
    try {
      date = Date::parse(row[date_idx]);
    } catch (const ParseError& e) {
      throw ParseError(path + ": row " + std::to_string(r + 1) + ": " + e.what());
    }
    keys.push_back(RecordKey{row[unit_idx], date});

    for (std::size_t c = 0; c < sensor_idx.size(); ++c) {
      double v = missing_value;
      // Unparseable numeric cells become missing values; the row is kept.
      if (!detail::parse_number(row[sensor_idx[c]], v)) v = missing_value;
      sensors[c].values.push_back(v);
    }
    for (std::size_t c = 0; c < failure_idx.size(); ++c) {
      const std::string& cell = row[failure_idx[c]];
      std::uint8_t v = 0;
      if (cell.empty() || cell == "0" || cell == "false")
        v = 0;  // absent failure record reads as "no failure"
      else if (cell == "1" || cell == "true")
        v = 1;
      else
        throw ParseError(path + ": row " + std::to_string(r + 1) +
                         ": malformed failure cell '" + cell + "' in column '" +
                         failures[c].name + "'");
      failures[c].values.push_back(v);
    }
  }
  return Dataset(std::move(keys), std::move(sensors), std::move(failures));
}

/** Keeps the first record of each (unit, date); later duplicates are dropped. */
inline Dataset deduplicate(const Dataset& d) {
  std::unordered_map<std::string_view, std::unordered_set<std::int32_t>> seen;
  std::vector<bool> keep(d.row_count(), false);
  for (std::size_t i = 0; i < d.row_count(); ++i) {
    const auto& key = d.keys()[i];
    if (seen[key.unit].insert(key.date.days).second) keep[i] = true;
  }
  return d.filter_rows(keep);
}

/**
 * Drops records with any configured sensor outside its plausibility range.
 * Sensors without a configured range are never filtered, so extreme but
 * real register readings survive. Missing cells never trigger a drop.
 */
inline Dataset filter_corrupt(const Dataset& d, const SchemaConfig& schema) {
  if (schema.plausibility_ranges.empty()) return d;
  std::vector<const SensorColumn*> cols;
  std::vector<std::pair<double, double>> ranges;
  for (const auto& [name, range] : schema.plausibility_ranges) {
    for (const auto& s : d.sensors()) {
      if (s.name == name) {
        cols.push_back(&s);
        ranges.push_back(range);
      }
    }
  }
  std::vector<bool> keep(d.row_count(), true);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto& values = cols[c]->values;
    const auto [lo, hi] = ranges[c];
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (is_missing(values[i])) continue;
      if (values[i] < lo || values[i] > hi) keep[i] = false;
    }
  }
  return d.filter_rows(keep);
}

/**
 * Writes a dataset back to CSV with the layout load_csv expects: unit and
 * date first, then sensors, then failures. Sensor values use the shortest
 * round-tripping decimal form; missing cells stay empty.
 */
inline void write_csv(const Dataset& d, std::ostream& os,
                      const std::string& unit_column = "unit",
                      const std::string& date_column = "date") {
  std::vector<std::string> row{unit_column, date_column};
  for (const auto& s : d.sensors()) row.push_back(s.name);
  for (const auto& f : d.failures()) row.push_back(f.name);
  detail::write_csv_row(os, row);
  for (std::size_t i = 0; i < d.row_count(); ++i) {
    row.clear();
    row.push_back(d.keys()[i].unit);
    row.push_back(d.keys()[i].date.to_string());
    for (const auto& s : d.sensors())
      row.push_back(is_missing(s.values[i]) ? std::string()
                                            : detail::format_number(s.values[i]));
    for (const auto& f : d.failures()) row.push_back(f.values[i] ? "1" : "0");
    detail::write_csv_row(os, row);
  }
}

/**
 * Builds the balanced per-failure dataset: every failure record is matched
 * with the most recent earlier normal record of the same unit. Failure
 * records with no earlier normal record are dropped (and counted).
 */
inline BalancedDataset balance(const Dataset& d, std::string_view failure_name) {
  const FailureColumn* f = d.find_failure(failure_name);
  if (!f) throw DataError("unknown failure column '" + std::string(failure_name) + "'");

  std::unordered_map<std::string_view, std::vector<std::size_t>> by_unit;
  for (std::size_t i = 0; i < d.row_count(); ++i) by_unit[d.keys()[i].unit].push_back(i);

  // counterpart[i]: most recent earlier normal row of the same unit, for
  // every failure row i
  std::unordered_map<std::size_t, std::size_t> counterpart;
  std::size_t total_failures = 0;
  for (auto& [unit, idx] : by_unit) {
    (void)unit;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return d.keys()[a].date < d.keys()[b].date;
    });
    bool have_normal = false;
    std::size_t last_normal = 0;
    std::size_t g = 0;
    while (g < idx.size()) {
      std::size_t h = g;
      while (h < idx.size() && d.keys()[idx[h]].date == d.keys()[idx[g]].date) ++h;
      for (std::size_t k = g; k < h; ++k) {
        if (f->values[idx[k]]) {
          ++total_failures;
          if (have_normal) counterpart.emplace(idx[k], last_normal);
        }
      }
      // normals of this date group become eligible for later dates only
      for (std::size_t k = g; k < h; ++k) {
        if (!f->values[idx[k]]) {
          last_normal = idx[k];
          have_normal = true;
          break;  // first occurrence wins among equal dates
        }
      }
      g = h;
    }
  }
  if (total_failures == 0)
    throw DataError("no positive examples for failure '" + std::string(failure_name) + "'");

  std::vector<std::size_t> order;
  std::vector<std::pair<std::size_t, std::size_t>> pairing;
  for (std::size_t i = 0; i < d.row_count(); ++i) {
    if (!f->values[i]) continue;
    auto it = counterpart.find(i);
    if (it == counterpart.end()) continue;
    pairing.emplace_back(order.size(), order.size() + 1);
    order.push_back(i);
    order.push_back(it->second);
  }

  Dataset all_cols = d.select_rows(order);
  std::vector<FailureColumn> single;
  for (const auto& col : all_cols.failures())
    if (col.name == failure_name) single.push_back(col);
  Dataset base(all_cols.keys(), all_cols.sensors(), std::move(single));

  BalancedDataset out;
  out.base = std::move(base);
  out.pairing = std::move(pairing);
  out.dropped_failures = total_failures - out.pairing.size();
  out.failure_name = std::string(failure_name);
  return out;
}

}  // namespace ftlearn

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ftlearn/errors.hpp"

namespace ftlearn {

/// Sentinel for absent sensor readings. Failure columns never hold it.
inline constexpr double missing_value = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

/// The four daily statistics recorded per sensor.
enum class Statistic { Min, Max, Avg, Range };

inline const char* to_string(Statistic s) {
  switch (s) {
    case Statistic::Min: return "min";
    case Statistic::Max: return "max";
    case Statistic::Avg: return "avg";
    case Statistic::Range: return "range";
  }
  return "?";
}

inline Statistic statistic_from_string(std::string_view s) {
  if (s == "min") return Statistic::Min;
  if (s == "max") return Statistic::Max;
  if (s == "avg") return Statistic::Avg;
  if (s == "range") return Statistic::Range;
  throw ParseError("unknown statistic '" + std::string(s) +
                   "' (expected min, max, avg or range)");
}

inline constexpr Statistic all_statistics[] = {Statistic::Min, Statistic::Max,
                                               Statistic::Avg, Statistic::Range};

/** Calendar day, stored as days since 1970-01-01 for cheap ordering. */
struct Date {
  std::int32_t days = 0;

  auto operator<=>(const Date&) const = default;

  static Date parse(std::string_view text) {
    // strict YYYY-MM-DD
    auto fail = [&] {
      throw ParseError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') fail();
    auto num = [&](int from, int to) {
      int v = 0;
      for (int i = from; i < to; ++i) {
        if (text[i] < '0' || text[i] > '9') fail();
        v = v * 10 + (text[i] - '0');
      }
      return v;
    };
    const std::chrono::year_month_day ymd{
        std::chrono::year{num(0, 4)},
        std::chrono::month{static_cast<unsigned>(num(5, 7))},
        std::chrono::day{static_cast<unsigned>(num(8, 10))}};
    if (!ymd.ok()) fail();
    return Date{static_cast<std::int32_t>(
        std::chrono::sys_days{ymd}.time_since_epoch().count())};
  }

  std::string to_string() const {
    const std::chrono::year_month_day ymd{
        std::chrono::sys_days{std::chrono::days{days}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }
};

/** Identifies one record: readings of one unit during one day. */
struct RecordKey {
  std::string unit;
  Date date;

  bool operator==(const RecordKey&) const = default;
};

/// Real-valued column holding one daily statistic of one sensor.
struct SensorColumn {
  std::string name;
  Statistic statistic = Statistic::Min;
  std::vector<double> values;  // missing cells are NaN
};

/// Boolean column of self-diagnosed failures; 1 means a failure was recorded.
struct FailureColumn {
  std::string name;
  std::vector<std::uint8_t> values;  // 0 or 1, never missing
};

/**
 * Columnar table keyed by (unit, date). Immutable once constructed;
 * concurrent readers are safe. All row filters produce new datasets.
 */
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<RecordKey> keys, std::vector<SensorColumn> sensors,
          std::vector<FailureColumn> failures)
      : keys_(std::move(keys)),
        sensors_(std::move(sensors)),
        failures_(std::move(failures)) {
    const std::size_t n = keys_.size();
    std::unordered_set<std::string> names;
    for (const auto& s : sensors_) {
      if (s.values.size() != n)
        throw DataError("sensor column '" + s.name + "' has " +
                        std::to_string(s.values.size()) + " values, expected " +
                        std::to_string(n));
      if (!names.insert(s.name).second)
        throw DataError("duplicate column name '" + s.name + "'");
    }
    for (const auto& f : failures_) {
      if (f.values.size() != n)
        throw DataError("failure column '" + f.name + "' has " +
                        std::to_string(f.values.size()) + " values, expected " +
                        std::to_string(n));
      if (!names.insert(f.name).second)
        throw DataError("duplicate column name '" + f.name + "'");
    }
  }

  std::size_t row_count() const { return keys_.size(); }
  const std::vector<RecordKey>& keys() const { return keys_; }
  const std::vector<SensorColumn>& sensors() const { return sensors_; }
  const std::vector<FailureColumn>& failures() const { return failures_; }

  const SensorColumn* find_sensor(std::string_view name) const {
    for (const auto& s : sensors_)
      if (s.name == name) return &s;
    return nullptr;
  }

  const SensorColumn* find_sensor(std::string_view name, Statistic st) const {
    for (const auto& s : sensors_)
      if (s.name == name && s.statistic == st) return &s;
    return nullptr;
  }

  const FailureColumn* find_failure(std::string_view name) const {
    for (const auto& f : failures_)
      if (f.name == name) return &f;
    return nullptr;
  }

  /// New dataset holding only the rows where keep[i] is true.
  Dataset filter_rows(const std::vector<bool>& keep) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (keep[i]) idx.push_back(i);
    return select_rows(idx);
  }

  /// New dataset with rows taken (possibly repeated) in the given order.
  Dataset select_rows(const std::vector<std::size_t>& idx) const {
    std::vector<RecordKey> k;
    k.reserve(idx.size());
    for (auto i : idx) k.push_back(keys_[i]);
    std::vector<SensorColumn> s;
    s.reserve(sensors_.size());
    for (const auto& col : sensors_) {
      SensorColumn out{col.name, col.statistic, {}};
      out.values.reserve(idx.size());
      for (auto i : idx) out.values.push_back(col.values[i]);
      s.push_back(std::move(out));
    }
    std::vector<FailureColumn> f;
    f.reserve(failures_.size());
    for (const auto& col : failures_) {
      FailureColumn out{col.name, {}};
      out.values.reserve(idx.size());
      for (auto i : idx) out.values.push_back(col.values[i]);
      f.push_back(std::move(out));
    }
    return Dataset(std::move(k), std::move(s), std::move(f));
  }

 private:
  std::vector<RecordKey> keys_;
  std::vector<SensorColumn> sensors_;
  std::vector<FailureColumn> failures_;
};

/** Proportions (p0, p1) of the two classes in a failure column. */
inline std::pair<double, double> class_proportions(const FailureColumn& f) {
  if (f.values.empty()) throw DataError("empty column '" + f.name + "'");
  std::size_t ones = 0;
  for (auto v : f.values) ones += v;
  const double p1 = static_cast<double>(ones) / static_cast<double>(f.values.size());
  const double p0 =
      static_cast<double>(f.values.size() - ones) / static_cast<double>(f.values.size());
  return {p0, p1};
}

/**
 * Aligned (sensor, failure) column pair for one analysis: rows where the
 * sensor value is missing are dropped pairwise, so each pair uses its own
 * maximal usable subset.
 */
inline std::pair<SensorColumn, FailureColumn> project(const Dataset& d,
                                                      std::string_view sensor_name,
                                                      Statistic statistic,
                                                      std::string_view failure_name) {
  const SensorColumn* s = d.find_sensor(sensor_name, statistic);
  if (!s)
    throw DataError("unknown sensor column '" + std::string(sensor_name) + "' with statistic " +
                    to_string(statistic));
  const FailureColumn* f = d.find_failure(failure_name);
  if (!f) throw DataError("unknown failure column '" + std::string(failure_name) + "'");

  SensorColumn out_s{s->name, s->statistic, {}};
  FailureColumn out_f{f->name, {}};
  for (std::size_t i = 0; i < s->values.size(); ++i) {
    if (is_missing(s->values[i])) continue;
    out_s.values.push_back(s->values[i]);
    out_f.values.push_back(f->values[i]);
  }
  if (out_s.values.empty()) throw DataError("no usable rows for sensor '" + s->name + "'");
  return {std::move(out_s), std::move(out_f)};
}

}  // namespace ftlearn

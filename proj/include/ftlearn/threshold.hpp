#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ftlearn/bool_column.hpp"
#include "ftlearn/dataset.hpp"
#include "ftlearn/detail/csv.hpp"
#include "ftlearn/errors.hpp"
#include "ftlearn/ingest.hpp"

namespace ftlearn {

/// Which side of the split carries the failure-majority readings.
enum class FailureSide { Leq, Gt };

inline const char* to_string(FailureSide s) {
  return s == FailureSide::Leq ? "leq" : "gt";
}

inline FailureSide failure_side_from_string(std::string_view s) {
  if (s == "leq") return FailureSide::Leq;
  if (s == "gt") return FailureSide::Gt;
  throw ParseError("unknown failure side '" + std::string(s) + "' (expected leq or gt)");
}

/** Learned split of one sensor column with respect to one failure column. */
struct Threshold {
  std::string sensor_name;
  Statistic statistic = Statistic::Min;
  double theta = 0.0;       // in sensor units; always a value observed in the data
  double gain = 0.0;        // bits removed by the split, in [0, entropy(f)]
  FailureSide failure_side = FailureSide::Leq;

  bool operator==(const Threshold&) const = default;
};

/// Human-readable condition, e.g. "min(s2_temp) ≤ 21.0".
inline std::string make_label(const Threshold& t) {
  return std::string(to_string(t.statistic)) + "(" + t.sensor_name + ") " +
         (t.failure_side == FailureSide::Leq ? "≤ " : "> ") +
         detail::format_number(t.theta);
}

/// Boolean column derived from a sensor column: 1 on the failure side of theta.
struct ThresholdedVariable {
  Threshold source;
  BoolColumn values;
};

namespace detail {

inline double binary_entropy(std::size_t n0, std::size_t n1) {
  const std::size_t n = n0 + n1;
  if (n == 0 || n0 == 0 || n1 == 0) return 0.0;
  const double p0 = static_cast<double>(n0) / static_cast<double>(n);
  const double p1 = static_cast<double>(n1) / static_cast<double>(n);
  return -(p0 * std::log2(p0) + p1 * std::log2(p1));
}

// Entropy removed by splitting n rows (n1 of class 1) into a left part of
// nl rows (n1l of class 1) and the remaining right part. An empty part
// contributes zero.
inline double split_gain(std::size_t n, std::size_t n1, std::size_t nl, std::size_t n1l) {
  const std::size_t nr = n - nl;
  const std::size_t n1r = n1 - n1l;
  const double e = binary_entropy(n - n1, n1);
  const double e_left = binary_entropy(nl - n1l, n1l);
  const double e_right = binary_entropy(nr - n1r, n1r);
  return e - (static_cast<double>(nl) / static_cast<double>(n)) * e_left -
         (static_cast<double>(nr) / static_cast<double>(n)) * e_right;
}

}  // namespace detail

/** Class impurity of a failure column, base 2, in [0, 1]. */
inline double entropy(const FailureColumn& f) {
  if (f.values.empty()) throw DataError("empty column '" + f.name + "'");
  std::size_t ones = 0;
  for (auto v : f.values) ones += v;
  return detail::binary_entropy(f.values.size() - ones, ones);
}

/**
 * Information gain of splitting the aligned pair (s, f) at theta, where the
 * left part holds the rows with s ≤ theta. Rows with a missing sensor value
 * are ignored pairwise.
 */
inline double gain(const SensorColumn& s, const FailureColumn& f, double theta) {
  if (s.values.size() != f.values.size())
    throw DataError("misaligned columns '" + s.name + "' and '" + f.name + "'");
  std::size_t n = 0, n1 = 0, nl = 0, n1l = 0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (is_missing(s.values[i])) continue;
    ++n;
    n1 += f.values[i];
    if (s.values[i] <= theta) {
      ++nl;
      n1l += f.values[i];
    }
  }
  if (n == 0) throw DataError("no usable rows for sensor '" + s.name + "'");
  return detail::split_gain(n, n1, nl, n1l);
}

/**
 * Scans every distinct observed value of s as a candidate threshold and
 * returns the gain-optimal one, together with the side of the split holding
 * the failure majority. Ties on gain resolve to the smallest theta; a tied
 * failure proportion resolves to the ≤ side.
 *
 * The scan sorts once and sweeps class counts across value groups, so the
 * cost is O(n log n) regardless of how many distinct values exist.
 */
inline Threshold find_optimal_threshold(const SensorColumn& s, const FailureColumn& f) {
  if (s.values.size() != f.values.size())
    throw DataError("misaligned columns '" + s.name + "' and '" + f.name + "'");

  std::vector<std::pair<double, std::uint8_t>> rows;
  rows.reserve(s.values.size());
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (is_missing(s.values[i])) continue;
    rows.emplace_back(s.values[i], f.values[i]);
    n1 += f.values[i];
  }
  const std::size_t n = rows.size();
  if (n == 0) throw DataError("no usable rows for sensor '" + s.name + "'");
  if (n1 == 0 || n1 == n) throw DataError("degenerate labels for '" + f.name + "'");

  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (rows.front().first == rows.back().first)
    throw DataError("constant sensor '" + s.name + "'");

  double best_gain = -1.0;
  double best_theta = 0.0;
  std::size_t best_nl = 0, best_n1l = 0;
  std::size_t nl = 0, n1l = 0;
  std::size_t i = 0;
  while (i < n) {
    const double value = rows[i].first;
    while (i < n && rows[i].first == value) {
      ++nl;
      n1l += rows[i].second;
      ++i;
    }
    const double g = detail::split_gain(n, n1, nl, n1l);
    if (g > best_gain) {  // strict: ascending order keeps the smallest theta on ties
      best_gain = g;
      best_theta = value;
      best_nl = nl;
      best_n1l = n1l;
    }
  }

  const std::size_t nr = n - best_nl;
  const std::size_t n1r = n1 - best_n1l;
  // Failure side: strictly greater failure proportion wins; compare by
  // cross-multiplication so the test is exact. An empty side never wins.
  const FailureSide side =
      (n1r * best_nl > best_n1l * nr) ? FailureSide::Gt : FailureSide::Leq;
  return Threshold{s.name, s.statistic, best_theta, best_gain, side};
}

/**
 * Discretizes a sensor column with a threshold learned for it: 1 on the
 * failure side, 0 on the other, missing where the reading is missing.
 */
inline ThresholdedVariable discretize(const SensorColumn& s, const Threshold& t) {
  if (s.name != t.sensor_name || s.statistic != t.statistic)
    throw DataError("threshold for " + std::string(to_string(t.statistic)) + "(" +
                    t.sensor_name + ") applied to " + to_string(s.statistic) + "(" +
                    s.name + ")");
  BoolColumn col(s.values.size());
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (is_missing(s.values[i])) {
      col.set_missing(i);
    } else if (t.failure_side == FailureSide::Leq) {
      col.set(i, s.values[i] <= t.theta);
    } else {
      col.set(i, s.values[i] > t.theta);
    }
  }
  return ThresholdedVariable{t, std::move(col)};
}

/// A sensor column that produced no threshold, with the reason why.
struct ThresholdSkip {
  std::string sensor_name;
  std::string reason;
};

struct ThresholdScan {
  std::vector<Threshold> thresholds;
  std::vector<ThresholdSkip> skipped;
};

/**
 * Learns one threshold per eligible sensor column of the given statistic
 * against the balanced dataset's failure column. Ineligible columns
 * (constant, all-missing, or leaving single-class labels) are reported as
 * skips, not errors.
 */
inline ThresholdScan threshold_all(const BalancedDataset& d, std::string_view failure_name,
                                   Statistic statistic) {
  const FailureColumn* f = d.base.find_failure(failure_name);
  if (!f)
    throw DataError("balanced dataset does not carry failure '" +
                    std::string(failure_name) + "'");
  ThresholdScan scan;
  for (const auto& s : d.base.sensors()) {
    if (s.statistic != statistic) continue;
    try {
      scan.thresholds.push_back(find_optimal_threshold(s, *f));
    } catch (const DataError& e) {
      scan.skipped.push_back(ThresholdSkip{s.name, e.what()});
    }
  }
  return scan;
}

}  // namespace ftlearn

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftlearn/dataset.hpp"
#include "ftlearn/errors.hpp"
#include "ftlearn/fault_tree.hpp"
#include "ftlearn/serialize.hpp"

namespace ftlearn {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;  // samples are drawn from [lo, hi)
};

/// Value distributions of one planted sensor, one per side of its theta.
struct SensorModel {
  Interval normal_side;
  Interval failure_side;
};

struct DecoySensor {
  std::string name;
  Interval range;
};

/**
 * A known fault tree plus sampling models, from which labeled datasets are
 * generated so structure recovery can be measured. Basic events carry
 * their firing probability in the tree's p field; every non-TLE event
 * needs a sensor model whose intervals sit strictly on the matching sides
 * of its theta.
 */
struct GroundTruth {
  FaultTree tree;
  std::map<std::string, SensorModel> sensor_models;
  double label_noise = 0.0;  // in [0, 0.5)
  int n_units = 1;
  int days_per_unit = 1;
  std::vector<DecoySensor> decoys;

  Statistic statistic() const {
    for (const auto& e : tree.events)
      if (e.threshold) return e.threshold->statistic;
    throw DataError("ground truth tree has no thresholded events");
  }

  void check() const {
    validate(tree);
    if (tree.gates.empty()) throw DataError("ground truth tree needs at least one gate");
    if (!(label_noise >= 0.0 && label_noise < 0.5))
      throw DataError("label_noise must lie in [0, 0.5)");
    if (n_units < 1 || days_per_unit < 1)
      throw DataError("n_units and days_per_unit must be positive");

    std::set<std::string> names{tree.events[tree.tle].label};
    const Statistic st = statistic();
    for (const auto& e : tree.events) {
      if (!e.threshold) continue;
      const Threshold& t = *e.threshold;
      if (t.statistic != st)
        throw DataError("ground truth mixes statistics across sensors");
      if (!names.insert(t.sensor_name).second)
        throw DataError("duplicate sensor '" + t.sensor_name + "' in ground truth");
      if (e.kind == EventKind::Basic && !(e.p && *e.p >= 0.0 && *e.p <= 1.0))
        throw DataError("basic event '" + e.label +
                        "' needs a firing probability in [0, 1]");
      auto it = sensor_models.find(t.sensor_name);
      if (it == sensor_models.end())
        throw DataError("no sensor model for '" + t.sensor_name + "'");
      const Interval& normal = it->second.normal_side;
      const Interval& failure = it->second.failure_side;
      for (const Interval& iv : {normal, failure})
        if (!(iv.lo < iv.hi))
          throw DataError("interval for '" + t.sensor_name + "' must satisfy lo < hi");
      // samples come from [lo, hi), so the boundary conditions below keep
      // every draw strictly on its own side of theta
      const bool ok = t.failure_side == FailureSide::Gt
                          ? (normal.hi <= t.theta && t.theta < failure.lo)
                          : (failure.hi <= t.theta && t.theta < normal.lo);
      if (!ok)
        throw DataError("intervals for '" + t.sensor_name +
                        "' do not straddle theta on the declared sides");
    }
    for (const auto& d : decoys) {
      if (!(d.range.lo < d.range.hi))
        throw DataError("decoy interval for '" + d.name + "' must satisfy lo < hi");
      if (!names.insert(d.name).second)
        throw DataError("decoy name '" + d.name + "' collides with another column");
    }
  }
};

namespace detail {

inline std::vector<std::size_t> postorder(const FaultTree& t) {
  std::vector<std::size_t> order;
  auto rec = [&](auto&& self, std::size_t ev) -> void {
    if (const Gate* g = t.gate_below(ev))
      for (auto in : g->inputs) self(self, in);
    order.push_back(ev);
  };
  rec(rec, t.tle);
  return order;
}

}  // namespace detail

/**
 * Samples a dataset from the ground truth: per record, basic events fire
 * independently with their probability, states propagate through the
 * gates, the failure label is the TLE state flipped with probability
 * label_noise, and each planted sensor draws a value from the interval
 * matching its own state. Decoys draw independently of everything.
 * The output is fully determined by (gt, seed, total_rows).
 */
inline Dataset generate(const GroundTruth& gt, std::uint64_t seed,
                        std::optional<std::size_t> total_rows = std::nullopt) {
  gt.check();
  const std::size_t rows = total_rows.value_or(static_cast<std::size_t>(gt.n_units) *
                                               static_cast<std::size_t>(gt.days_per_unit));
  const Statistic st = gt.statistic();
  const std::vector<std::size_t> order = detail::postorder(gt.tree);

  // emitted column order: planted sensors and decoys together, by name
  struct ColumnSpec {
    std::string name;
    std::size_t event = 0;  // meaningful when planted
    bool planted = false;
    Interval range;  // decoys only
  };
  std::vector<ColumnSpec> specs;
  for (std::size_t i = 0; i < gt.tree.events.size(); ++i)
    if (gt.tree.events[i].threshold)
      specs.push_back({gt.tree.events[i].threshold->sensor_name, i, true, {}});
  for (const auto& d : gt.decoys) specs.push_back({d.name, 0, false, d.range});
  std::sort(specs.begin(), specs.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });

  std::vector<RecordKey> keys;
  keys.reserve(rows);
  std::vector<SensorColumn> sensors;
  for (const auto& spec : specs) {
    SensorColumn col{spec.name, st, {}};
    col.values.reserve(rows);
    sensors.push_back(std::move(col));
  }
  FailureColumn failure{gt.tree.events[gt.tree.tle].label, {}};
  failure.values.reserve(rows);

  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  const Date start = Date::parse("2020-01-01");
  std::vector<std::uint8_t> state(gt.tree.events.size(), 0);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t unit = r / static_cast<std::size_t>(gt.days_per_unit);
    const std::size_t day = r % static_cast<std::size_t>(gt.days_per_unit);
    char unit_name[32];
    std::snprintf(unit_name, sizeof unit_name, "unit_%05zu", unit + 1);
    keys.push_back(RecordKey{unit_name, Date{start.days + static_cast<std::int32_t>(day)}});

    // children evaluate before their gate, so one pass suffices
    for (const std::size_t ev : order) {
      const Gate* g = gt.tree.gate_below(ev);
      if (!g) {
        state[ev] = uniform(0.0, 1.0) < *gt.tree.events[ev].p ? 1 : 0;
        continue;
      }
      bool v = g->type == GateType::And;
      for (auto in : g->inputs)
        v = g->type == GateType::And ? (v && state[in]) : (v || state[in]);
      state[ev] = v ? 1 : 0;
    }
    std::uint8_t label = state[gt.tree.tle];
    if (gt.label_noise > 0.0 && uniform(0.0, 1.0) < gt.label_noise) label ^= 1;
    failure.values.push_back(label);

    for (std::size_t c = 0; c < specs.size(); ++c) {
      const ColumnSpec& spec = specs[c];
      Interval iv;
      if (spec.planted) {
        const auto& model = gt.sensor_models.at(spec.name);
        iv = state[spec.event] ? model.failure_side : model.normal_side;
      } else {
        iv = spec.range;
      }
      sensors[c].values.push_back(uniform(iv.lo, iv.hi));
    }
  }
  return Dataset(std::move(keys), std::move(sensors), {std::move(failure)});
}

/** How well a learned tree recovered the planted structure. */
struct RecoveryReport {
  std::size_t planted_variables = 0;
  std::size_t learned_variables = 0;
  std::size_t recovered_variables = 0;
  double variable_recall = 0.0;
  double variable_precision = 0.0;
  double mean_theta_error = 0.0;  // over recovered variables
  bool top_gate_type_match = false;
  double learned_significance = 0.0;
  int learned_depth = 0;
  int true_depth = 0;
};

inline RecoveryReport recovery_report(const FaultTree& learned, const GroundTruth& gt) {
  validate(learned);
  gt.check();
  std::map<std::string, double> planted;
  for (const auto& e : gt.tree.events)
    if (e.threshold) planted[e.threshold->sensor_name] = e.threshold->theta;

  RecoveryReport r;
  r.planted_variables = planted.size();
  double error_sum = 0.0;
  for (const auto& e : learned.events) {
    if (!e.threshold) continue;
    ++r.learned_variables;
    auto it = planted.find(e.threshold->sensor_name);
    if (it == planted.end()) continue;
    ++r.recovered_variables;
    error_sum += std::abs(e.threshold->theta - it->second);
  }
  if (r.planted_variables)
    r.variable_recall =
        static_cast<double>(r.recovered_variables) / static_cast<double>(r.planted_variables);
  if (r.learned_variables)
    r.variable_precision =
        static_cast<double>(r.recovered_variables) / static_cast<double>(r.learned_variables);
  if (r.recovered_variables)
    r.mean_theta_error = error_sum / static_cast<double>(r.recovered_variables);
  if (!learned.gates.empty() && !gt.tree.gates.empty())
    r.top_gate_type_match = learned.top_gate()->type == gt.tree.top_gate()->type;
  r.learned_significance = learned.significance;
  r.learned_depth = learned.gates.empty() ? 0 : depth(learned);
  r.true_depth = depth(gt.tree);
  return r;
}

inline nlohmann::json report_to_json(const RecoveryReport& r) {
  return {{"planted_variables", r.planted_variables},
          {"learned_variables", r.learned_variables},
          {"recovered_variables", r.recovered_variables},
          {"variable_recall", r.variable_recall},
          {"variable_precision", r.variable_precision},
          {"mean_theta_error", r.mean_theta_error},
          {"top_gate_type_match", r.top_gate_type_match},
          {"learned_significance", r.learned_significance},
          {"learned_depth", r.learned_depth},
          {"true_depth", r.true_depth}};
}

inline nlohmann::json interval_to_json(const Interval& iv) {
  return nlohmann::json::array({iv.lo, iv.hi});
}

inline Interval interval_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2)
    throw ParseError(where + ": interval must be [lo, hi]");
  return Interval{j[0].get<double>(), j[1].get<double>()};
}

/**
 * Ground truth files reuse the fault tree document, extended with
 * sensor_models, label_noise, n_units, days_per_unit and decoys. "decoys"
 * is either a count (auto-named, range [0, 1)) or an explicit list; it
 * defaults to 10 so learned structure always competes against unrelated
 * variables.
 */
inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
  GroundTruth gt;
  gt.tree = tree_from_json(j);
  try {
    for (const auto& [name, jm] : j.at("sensor_models").items()) {
      SensorModel m;
      m.normal_side = interval_from_json(jm.at("normal_side"),
                                         "sensor_models." + name + ".normal_side");
      m.failure_side = interval_from_json(jm.at("failure_side"),
                                          "sensor_models." + name + ".failure_side");
      gt.sensor_models[name] = m;
    }
    gt.label_noise = j.value("label_noise", 0.0);
    gt.n_units = j.at("n_units").get<int>();
    gt.days_per_unit = j.at("days_per_unit").get<int>();
    if (!j.contains("decoys")) {
      for (int i = 1; i <= 10; ++i) {
        char name[24];
        std::snprintf(name, sizeof name, "decoy_%02d", i);
        gt.decoys.push_back(DecoySensor{name, Interval{0.0, 1.0}});
      }
    } else if (j.at("decoys").is_number_integer()) {
      const int count = j.at("decoys").get<int>();
      if (count < 0) throw ParseError("decoys count must be non-negative");
      for (int i = 1; i <= count; ++i) {
        char name[24];
        std::snprintf(name, sizeof name, "decoy_%02d", i);
        gt.decoys.push_back(DecoySensor{name, Interval{0.0, 1.0}});
      }
    } else {
      for (const auto& jd : j.at("decoys")) {
        DecoySensor d;
        d.name = jd.at("name").get<std::string>();
        d.range = interval_from_json(jd.at("range"), "decoys." + d.name + ".range");
        gt.decoys.push_back(std::move(d));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad ground truth document: ") + e.what());
  }
  gt.check();
  return gt;
}

inline nlohmann::json ground_truth_to_json(const GroundTruth& gt) {
  nlohmann::json j = tree_to_json(gt.tree);
  nlohmann::json models;
  for (const auto& [name, m] : gt.sensor_models) {
    models[name] = {{"normal_side", interval_to_json(m.normal_side)},
                    {"failure_side", interval_to_json(m.failure_side)}};
  }
  j["sensor_models"] = std::move(models);
  j["label_noise"] = gt.label_noise;
  j["n_units"] = gt.n_units;
  j["days_per_unit"] = gt.days_per_unit;
  nlohmann::json decoys = nlohmann::json::array();
  for (const auto& d : gt.decoys)
    decoys.push_back({{"name", d.name}, {"range", interval_to_json(d.range)}});
  j["decoys"] = std::move(decoys);
  return j;
}

inline GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ground truth file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return ground_truth_from_json(j);
}

}  // namespace ftlearn

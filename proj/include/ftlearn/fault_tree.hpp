#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ftlearn/errors.hpp"
#include "ftlearn/ingest.hpp"
#include "ftlearn/significance.hpp"
#include "ftlearn/threshold.hpp"

namespace ftlearn {

enum class EventKind { Tle, Basic, Intermediate };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Tle: return "tle";
    case EventKind::Basic: return "basic";
    case EventKind::Intermediate: return "intermediate";
  }
  return "?";
}

inline EventKind event_kind_from_string(std::string_view s) {
  if (s == "tle") return EventKind::Tle;
  if (s == "basic") return EventKind::Basic;
  if (s == "intermediate") return EventKind::Intermediate;
  throw ParseError("unknown event kind '" + std::string(s) + "'");
}

/**
 * Node of a fault tree. The top level event carries the failure variable;
 * every other event is a thresholded sensor condition. Basic events get an
 * occurrence probability relative to the balanced dataset.
 */
struct Event {
  EventKind kind = EventKind::Basic;
  std::string label;
  std::optional<Threshold> threshold;  // absent only for the TLE
  std::optional<double> p;

  bool operator==(const Event&) const = default;
};

/// Logical gate: inputs combine into the output event.
struct Gate {
  GateType type = GateType::And;
  std::size_t output = 0;           // event index
  std::vector<std::size_t> inputs;  // event indices
  double significance = 0.0;

  bool operator==(const Gate&) const = default;
};

/**
 * Single-rooted DAG of events and gates describing how thresholded sensor
 * conditions combine into one failure variable. Tree-level significance is
 * the top gate's: a lower bound on input-output correlation across gates.
 */
struct FaultTree {
  std::vector<Event> events;  // events[tle] is the root
  std::size_t tle = 0;
  std::vector<Gate> gates;
  double significance = 0.0;

  bool operator==(const FaultTree&) const = default;

  const Gate* gate_below(std::size_t event) const {
    for (const auto& g : gates)
      if (g.output == event) return &g;
    return nullptr;
  }

  /// The gate whose output is the TLE; null for a gateless tree.
  const Gate* top_gate() const { return gate_below(tle); }
};

/**
 * Checks every structural invariant; throws DataError naming the first
 * violation. max_inputs bounds gate arity when given; probabilities on
 * basic events are required only when asked, since trees under
 * construction have not been annotated yet.
 */
inline void validate(const FaultTree& t, std::optional<int> max_inputs = std::nullopt,
                     bool require_probabilities = false) {
  const std::size_t n = t.events.size();
  if (n == 0) throw DataError("tree has no events");
  if (t.tle >= n) throw DataError("tle index out of range");

  for (std::size_t i = 0; i < n; ++i) {
    const bool is_tle = t.events[i].kind == EventKind::Tle;
    if (is_tle != (i == t.tle))
      throw DataError("event '" + t.events[i].label +
                      "': kind does not match the tle index");
    if (!is_tle && !t.events[i].threshold)
      throw DataError("event '" + t.events[i].label + "' lacks a threshold");
  }

  std::vector<int> produced_by(n, -1);
  for (std::size_t gi = 0; gi < t.gates.size(); ++gi) {
    const Gate& g = t.gates[gi];
    if (g.output >= n) throw DataError("gate output index out of range");
    if (produced_by[g.output] != -1)
      throw DataError("event '" + t.events[g.output].label +
                      "' is the output of two gates");
    produced_by[g.output] = static_cast<int>(gi);
    if (g.inputs.size() < 2)
      throw DataError("gate below '" + t.events[g.output].label +
                      "' has fewer than 2 inputs");
    if (max_inputs && g.inputs.size() > static_cast<std::size_t>(*max_inputs))
      throw DataError("gate below '" + t.events[g.output].label + "' has " +
                      std::to_string(g.inputs.size()) + " inputs, limit is " +
                      std::to_string(*max_inputs));
    std::set<std::size_t> distinct(g.inputs.begin(), g.inputs.end());
    if (distinct.size() != g.inputs.size())
      throw DataError("gate below '" + t.events[g.output].label +
                      "' has duplicate inputs");
    for (auto in : g.inputs) {
      if (in >= n) throw DataError("gate input index out of range");
      if (in == t.tle) throw DataError("the top level event cannot be a gate input");
    }
  }

  // Reachability and acyclicity from the TLE downwards. Iterative DFS;
  // cycles show up as an edge into an open node.
  std::vector<int> state(n, 0);  // 0 unseen, 1 open, 2 done
  std::vector<std::pair<std::size_t, std::size_t>> frames{{t.tle, 0}};
  state[t.tle] = 1;
  while (!frames.empty()) {
    auto& [ev, next] = frames.back();
    const int gi = produced_by[ev];
    const Gate* g = gi >= 0 ? &t.gates[gi] : nullptr;
    if (!g || next >= g->inputs.size()) {
      state[ev] = 2;
      frames.pop_back();
      continue;
    }
    const std::size_t child = g->inputs[next++];
    if (state[child] == 1) throw DataError("cycle through '" + t.events[child].label + "'");
    if (state[child] == 0) {
      state[child] = 1;
      frames.emplace_back(child, 0);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (state[i] != 2)
      throw DataError("event '" + t.events[i].label + "' is not reachable from the TLE");

  // Kinds, sensor uniqueness, probabilities.
  std::set<std::string> sensors;
  for (std::size_t i = 0; i < n; ++i) {
    const Event& e = t.events[i];
    if (e.kind == EventKind::Tle) continue;
    const bool has_gate = produced_by[i] != -1;
    if (has_gate && e.kind != EventKind::Intermediate)
      throw DataError("event '" + e.label + "' outputs a gate but is marked basic");
    if (!has_gate && e.kind != EventKind::Basic)
      throw DataError("event '" + e.label + "' is a leaf but is marked intermediate");
    if (!sensors.insert(e.threshold->sensor_name).second)
      throw DataError("sensor '" + e.threshold->sensor_name +
                      "' appears in more than one location");
    if (require_probabilities && e.kind == EventKind::Basic && !e.p)
      throw DataError("basic event '" + e.label + "' lacks a probability");
  }

  if (!t.gates.empty()) {
    const Gate* top = t.top_gate();
    if (!top) throw DataError("no gate outputs the top level event");
    for (const auto& g : t.gates)
      if (g.significance < top->significance)
        throw DataError("gate below '" + t.events[g.output].label +
                        "' scores below the top gate");
    if (t.significance != top->significance)
      throw DataError("tree significance differs from the top gate's");
  }
}

/** Number of gates on the longest path from the TLE down to a basic event. */
inline int depth(const FaultTree& t) {
  if (t.gates.empty()) throw DataError("empty tree");
  validate(t);  // guarantees termination of the recursion below
  std::vector<int> memo(t.events.size(), -1);
  auto rec = [&](auto&& self, std::size_t ev) -> int {
    if (memo[ev] >= 0) return memo[ev];
    const Gate* g = t.gate_below(ev);
    int d = 0;
    if (g) {
      for (auto in : g->inputs) d = std::max(d, self(self, in));
      d += 1;
    }
    return memo[ev] = d;
  };
  return rec(rec, t.tle);
}

/**
 * Returns a copy whose basic events carry the share of rows on the failure
 * side of their threshold, relative to the balanced dataset. Read these
 * probabilities in that balanced context only.
 */
inline FaultTree annotate_probabilities(const FaultTree& t, const BalancedDataset& d) {
  FaultTree out = t;
  for (auto& e : out.events) {
    if (e.kind != EventKind::Basic) continue;
    if (!e.threshold) throw DataError("basic event '" + e.label + "' lacks a threshold");
    const SensorColumn* s =
        d.base.find_sensor(e.threshold->sensor_name, e.threshold->statistic);
    if (!s)
      throw DataError("balanced dataset lacks sensor '" + e.threshold->sensor_name +
                      "' with statistic " + to_string(e.threshold->statistic));
    const ThresholdedVariable v = discretize(*s, *e.threshold);
    const std::size_t present = v.values.count_valid();
    if (present == 0)
      throw DataError("sensor '" + s->name + "' has no usable rows for probabilities");
    e.p = static_cast<double>(v.values.count_ones()) / static_cast<double>(present);
  }
  return out;
}

}  // namespace ftlearn

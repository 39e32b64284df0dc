#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftlearn/fault_tree.hpp"
#include "ftlearn/threshold.hpp"

namespace ftlearn {

inline constexpr int format_version = 1;

inline nlohmann::json threshold_to_json(const Threshold& t) {
  return {{"sensor", t.sensor_name},
          {"statistic", to_string(t.statistic)},
          {"theta", t.theta},
          {"gain", t.gain},
          {"failure_side", to_string(t.failure_side)}};
}

inline Threshold threshold_from_json(const nlohmann::json& j, const std::string& where) {
  try {
    Threshold t;
    t.sensor_name = j.at("sensor").get<std::string>();
    t.statistic = statistic_from_string(j.at("statistic").get<std::string>());
    t.theta = j.at("theta").get<double>();
    t.gain = j.value("gain", 0.0);
    t.failure_side = failure_side_from_string(j.at("failure_side").get<std::string>());
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

inline nlohmann::json tree_to_json(const FaultTree& t) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : t.events) {
    nlohmann::json je{{"kind", to_string(e.kind)}, {"label", e.label}};
    if (e.threshold) je["threshold"] = threshold_to_json(*e.threshold);
    if (e.p) je["p"] = *e.p;
    events.push_back(std::move(je));
  }
  nlohmann::json gates = nlohmann::json::array();
  for (const auto& g : t.gates) {
    gates.push_back({{"type", to_string(g.type)},
                     {"output", g.output},
                     {"inputs", g.inputs},
                     {"significance", g.significance}});
  }
  return {{"format_version", format_version},
          {"significance", t.significance},
          {"tle", t.tle},
          {"events", std::move(events)},
          {"gates", std::move(gates)}};
}

/**
 * Rebuilds a tree from its JSON form and re-checks every structural
 * invariant, so hand-written documents cannot smuggle in an invalid tree.
 * Unknown top-level fields are ignored (extended formats embed this one).
 */
inline FaultTree tree_from_json(const nlohmann::json& j) {
  FaultTree t;
  try {
    if (j.contains("format_version") && j.at("format_version").get<int>() != format_version)
      throw ParseError("unsupported format_version " + j.at("format_version").dump());
    t.significance = j.at("significance").get<double>();
    t.tle = j.at("tle").get<std::size_t>();
    const auto& events = j.at("events");
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& je = events[i];
      const std::string where = "events[" + std::to_string(i) + "]";
      Event e;
      e.kind = event_kind_from_string(je.at("kind").get<std::string>());
      e.label = je.at("label").get<std::string>();
      if (je.contains("threshold"))
        e.threshold = threshold_from_json(je.at("threshold"), where + ".threshold");
      if (je.contains("p")) e.p = je.at("p").get<double>();
      t.events.push_back(std::move(e));
    }
    const auto& gates = j.at("gates");
    for (std::size_t i = 0; i < gates.size(); ++i) {
      const auto& jg = gates[i];
      const std::string where = "gates[" + std::to_string(i) + "]";
      Gate g;
      try {
        g.type = gate_type_from_string(jg.at("type").get<std::string>());
      } catch (const ParseError& e) {
        throw ParseError(where + ".type: " + e.what());
      }
      g.output = jg.at("output").get<std::size_t>();
      g.inputs = jg.at("inputs").get<std::vector<std::size_t>>();
      g.significance = jg.at("significance").get<double>();
      t.gates.push_back(std::move(g));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad fault tree document: ") + e.what());
  }
  try {
    validate(t);
  } catch (const DataError& e) {
    throw ParseError(std::string("invalid fault tree: ") + e.what());
  }
  return t;
}

inline std::string to_json(const FaultTree& t) { return tree_to_json(t).dump(2) + "\n"; }

inline FaultTree from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what());
  }
  return tree_from_json(j);
}

struct DotOptions {
  bool show_gain = false;  // print each condition's split gain on its node
};

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline std::string two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

/**
 * Graphviz form of the tree: the TLE as a house, gates as boxes labeled
 * with type and significance, leaves as circles with their condition and
 * probability. Node order follows event/gate indices, so equal trees
 * serialize byte-identically.
 */
inline std::string to_dot(const FaultTree& t, const DotOptions& options = {}) {
  std::string out = "digraph fault_tree {\n  rankdir=TB;\n";
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    const Event& e = t.events[i];
    std::string label = detail::dot_escape(e.label);
    const char* shape = "ellipse";
    if (e.kind == EventKind::Tle) {
      shape = "house";
    } else if (e.kind == EventKind::Basic) {
      shape = "circle";
      if (e.p) label += "\\np=" + detail::two_decimals(*e.p);
    }
    if (options.show_gain && e.threshold)
      label += "\\ngain=" + detail::two_decimals(e.threshold->gain);
    out += "  e" + std::to_string(i) + " [shape=" + shape + ", label=\"" + label + "\"];\n";
  }
  for (std::size_t i = 0; i < t.gates.size(); ++i) {
    const Gate& g = t.gates[i];
    out += "  g" + std::to_string(i) + " [shape=box, label=\"" +
           (g.type == GateType::And ? "AND" : "OR") + "\\n" +
           detail::two_decimals(g.significance) + "\"];\n";
  }
  for (std::size_t i = 0; i < t.gates.size(); ++i) {
    const Gate& g = t.gates[i];
    for (auto in : g.inputs)
      out += "  e" + std::to_string(in) + " -> g" + std::to_string(i) + ";\n";
    out += "  g" + std::to_string(i) + " -> e" + std::to_string(g.output) + ";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace ftlearn

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ftlearn/bool_column.hpp"
#include "ftlearn/errors.hpp"
#include "ftlearn/fault_tree.hpp"
#include "ftlearn/ingest.hpp"
#include "ftlearn/significance.hpp"
#include "ftlearn/threshold.hpp"

namespace ftlearn {

/**
 * Knobs of the greedy search. Tie-breaking is a fixed policy, not a knob:
 * higher significance, then AND before OR, then fewer inputs, then input
 * labels in lexicographic order.
 */
struct LearnerConfig {
  int max_inputs = 3;
  // The first gate is accepted only if it scores strictly above this.
  double min_top_significance = 0.0;
  Statistic statistic = Statistic::Min;
  std::uint64_t random_seed = 0;  // reserved for sampling-based extensions

  void check() const {
    if (max_inputs < 2) throw SchemaError("max_inputs must be at least 2");
    if (min_top_significance < -1.0 || min_top_significance >= 1.0)
      throw SchemaError("min_top_significance must lie in [-1, 1)");
  }
};

namespace detail {

/// Worker cap from FTLEARN_THREADS; 0 or unset means one per hardware thread.
inline unsigned worker_threads() {
  long v = 0;
  if (const char* env = std::getenv("FTLEARN_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed >= 0) v = parsed;
  }
  if (v > 0) return static_cast<unsigned>(v);
  return std::max(1u, std::thread::hardware_concurrency());
}

// One subset of candidate variables, scored as both an AND and an OR gate.
struct ScoredSubset {
  std::vector<std::size_t> positions;  // into the label-sorted candidate list
  double and_phi = 0.0;
  double or_phi = 0.0;
};

/**
 * Scores one subset against the output column in a single pass over the
 * word planes, evaluating the AND and the OR expression together. Rows
 * missing in the output or any input are skipped. A subset with no jointly
 * present rows scores 0: it carries no signal and can never be selected.
 */
inline void score_subset(const BoolColumn& output,
                         const std::vector<const BoolColumn*>& cols, ScoredSubset& out) {
  const auto& ov = output.value_words();
  const auto& om = output.valid_words();
  const std::size_t words = ov.size();
  std::uint64_t n_and = 0, n_or = 0, n11_and = 0, n11_or = 0, n_out = 0, n_total = 0;
  for (std::size_t w = 0; w < words; ++w) {
    std::uint64_t bits_and = cols[0]->value_words()[w];
    std::uint64_t bits_or = bits_and;
    std::uint64_t valid = cols[0]->valid_words()[w];
    for (std::size_t k = 1; k < cols.size(); ++k) {
      bits_and &= cols[k]->value_words()[w];
      bits_or |= cols[k]->value_words()[w];
      valid &= cols[k]->valid_words()[w];
    }
    valid &= om[w];
    bits_and &= valid;
    bits_or &= valid;
    n_and += std::popcount(bits_and);
    n_or += std::popcount(bits_or);
    n11_and += std::popcount(bits_and & ov[w]);
    n11_or += std::popcount(bits_or & ov[w]);
    n_out += std::popcount(ov[w] & valid);
    n_total += std::popcount(valid);
  }
  auto phi_of = [&](std::uint64_t n11, std::uint64_t n_expr) {
    if (n_total == 0) return 0.0;
    return phi(ContingencyTable{n11, n_out - n11, n_expr - n11,
                                n_total - n_out - n_expr + n11});
  };
  out.and_phi = phi_of(n11_and, n_and);
  out.or_phi = phi_of(n11_or, n_or);
}

struct RankedCandidate {
  GateType type = GateType::And;
  const std::vector<std::size_t>* positions = nullptr;
  double significance = 0.0;
};

// The fixed tie-break policy. Candidate positions are label-sorted, so
// comparing position tuples compares input labels lexicographically.
inline bool better_candidate(const RankedCandidate& a, const RankedCandidate& b) {
  if (a.significance != b.significance) return a.significance > b.significance;
  if (a.type != b.type) return a.type == GateType::And;
  if (a.positions->size() != b.positions->size())
    return a.positions->size() < b.positions->size();
  return *a.positions < *b.positions;
}

inline void enumerate_subsets(std::size_t m, int max_arity,
                              std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> pick;
  auto rec = [&](auto&& self, std::size_t from) -> void {
    if (pick.size() >= 2) out.push_back(pick);
    if (static_cast<int>(pick.size()) == max_arity) return;
    for (std::size_t i = from; i < m; ++i) {
      pick.push_back(i);
      self(self, i + 1);
      pick.pop_back();
    }
  };
  rec(rec, 0);
  // smaller subsets first; within one arity the recursion is lexicographic
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() < b.size();
  });
}

}  // namespace detail

/**
 * Greedy single-gate search: scores every gate type over every subset of
 * 2..max_inputs candidate variables against the output column and returns
 * the top-ranked candidate, or nothing when fewer than two candidates
 * remain. The returned inputs are indices into `variables`, in label
 * order. Evaluation may run on several worker threads; the ranking is a
 * total order applied after a full deterministic reduction, so the result
 * never depends on scheduling.
 */
inline std::optional<GateCandidate> best_gate_for(
    const BoolColumn& output, const std::vector<ThresholdedVariable>& variables,
    const std::vector<std::size_t>& candidates, const LearnerConfig& config,
    std::size_t* evaluated = nullptr) {
  config.check();
  if (evaluated) *evaluated = 0;
  if (candidates.size() < 2) return std::nullopt;

  std::vector<std::size_t> sorted = candidates;
  std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
    return make_label(variables[a].source) < make_label(variables[b].source);
  });

  std::vector<std::vector<std::size_t>> subsets;
  detail::enumerate_subsets(sorted.size(), config.max_inputs, subsets);
  std::vector<detail::ScoredSubset> scored(subsets.size());
  for (std::size_t i = 0; i < subsets.size(); ++i)
    scored[i].positions = std::move(subsets[i]);

  auto score_range = [&](std::size_t from, std::size_t to) {
    std::vector<const BoolColumn*> cols;
    for (std::size_t i = from; i < to; ++i) {
      cols.clear();
      for (auto pos : scored[i].positions) cols.push_back(&variables[sorted[pos]].values);
      detail::score_subset(output, cols, scored[i]);
    }
  };

  const unsigned threads = detail::worker_threads();
  if (threads <= 1 || scored.size() < 64) {
    score_range(0, scored.size());
  } else {
    const std::size_t chunk = (scored.size() + threads - 1) / threads;
    std::vector<std::future<void>> futures;
    for (std::size_t from = 0; from < scored.size(); from += chunk) {
      const std::size_t to = std::min(from + chunk, scored.size());
      futures.push_back(std::async(std::launch::async, score_range, from, to));
    }
    for (auto& f : futures) f.get();
  }
  if (evaluated) *evaluated = 2 * scored.size();

  detail::RankedCandidate best;
  bool have_best = false;
  for (const auto& s : scored) {
    for (const GateType type : {GateType::And, GateType::Or}) {
      detail::RankedCandidate c{type, &s.positions,
                                type == GateType::And ? s.and_phi : s.or_phi};
      if (!have_best || detail::better_candidate(c, best)) {
        best = c;
        have_best = true;
      }
    }
  }

  GateCandidate out;
  out.gate_type = best.type;
  out.significance = best.significance;
  for (auto pos : *best.positions) out.inputs.push_back(sorted[pos]);
  return out;
}

/** Mutable state of one greedy construction run. */
struct SearchState {
  FaultTree tree;
  std::vector<bool> used_variables;
  std::deque<std::size_t> frontier;          // event indices, FIFO
  std::vector<std::size_t> event_variable;   // event index -> variable index
};

/**
 * Learns one fault tree for the given failure variable over its balanced
 * dataset: learns thresholds for every eligible sensor, then greedily
 * attaches the best gate below the next frontier event until no candidate
 * passes the significance control or every variable is used. Throws
 * NoSignificantStructure when not even a top gate qualifies.
 */
inline FaultTree learn(const BalancedDataset& data, std::string_view failure_name,
                       const LearnerConfig& config) {
  config.check();
  const FailureColumn* f = data.base.find_failure(failure_name);
  if (!f)
    throw DataError("balanced dataset does not carry failure '" +
                    std::string(failure_name) + "'");

  const ThresholdScan scan = threshold_all(data, failure_name, config.statistic);
  if (scan.thresholds.size() < 2)
    throw DataError("fewer than 2 usable sensor variables for failure '" +
                    std::string(failure_name) + "' with statistic " +
                    to_string(config.statistic));

  std::vector<ThresholdedVariable> variables;
  variables.reserve(scan.thresholds.size());
  for (const auto& t : scan.thresholds) {
    const SensorColumn* s = data.base.find_sensor(t.sensor_name, t.statistic);
    variables.push_back(discretize(*s, t));
  }

  const BoolColumn tle_column = to_bool_column(*f);

  SearchState state;
  state.tree.events.push_back(Event{EventKind::Tle, std::string(failure_name), {}, {}});
  state.tree.tle = 0;
  state.used_variables.assign(variables.size(), false);
  state.frontier.push_back(0);
  state.event_variable.push_back(variables.size());  // no variable behind the TLE

  double top_significance = 0.0;
  std::size_t used_count = 0;

  while (!state.frontier.empty()) {
    if (variables.size() - used_count < 2) break;  // no further gate can be formed
    const std::size_t event = state.frontier.front();
    state.frontier.pop_front();

    std::vector<std::size_t> unused;
    for (std::size_t i = 0; i < variables.size(); ++i)
      if (!state.used_variables[i]) unused.push_back(i);

    const BoolColumn& output_column = event == state.tree.tle
                                          ? tle_column
                                          : variables[state.event_variable[event]].values;
    const auto best = best_gate_for(output_column, variables, unused, config);
    if (!best) break;

    const bool accept = event == state.tree.tle
                            ? best->significance > config.min_top_significance
                            : best->significance >= top_significance;
    if (!accept) continue;  // the event stays a leaf

    Gate gate;
    gate.type = best->gate_type;
    gate.output = event;
    gate.significance = best->significance;
    for (auto vi : best->inputs) {
      state.used_variables[vi] = true;
      ++used_count;
      state.tree.events.push_back(
          Event{EventKind::Basic, make_label(variables[vi].source),
                variables[vi].source, std::nullopt});
      const std::size_t new_event = state.tree.events.size() - 1;
      state.event_variable.push_back(vi);
      gate.inputs.push_back(new_event);
      state.frontier.push_back(new_event);
    }
    if (event != state.tree.tle) state.tree.events[event].kind = EventKind::Intermediate;
    state.tree.gates.push_back(std::move(gate));
    if (state.tree.gates.size() == 1) {
      top_significance = state.tree.gates.front().significance;
      state.tree.significance = top_significance;
    }
    validate(state.tree, config.max_inputs);
  }

  if (state.tree.gates.empty())
    throw NoSignificantStructure("no significant structure for failure '" +
                                 std::string(failure_name) + "'");

  FaultTree annotated = annotate_probabilities(state.tree, data);
  validate(annotated, config.max_inputs, /*require_probabilities=*/true);
  return annotated;
}

/** Outcome of one (failure, statistic) learning attempt. */
struct LearnAttempt {
  std::string failure;
  Statistic statistic = Statistic::Min;
  std::optional<FaultTree> tree;
  std::string skip_reason;  // set when no tree was produced
  std::int64_t runtime_ms = 0;
};

/**
 * One attempt per (failure variable, statistic) pair, failures in name
 * order. Attempts that cannot produce a tree record their reason and never
 * abort the sweep.
 */
inline std::vector<LearnAttempt> learn_all(const Dataset& d, const LearnerConfig& base) {
  std::vector<std::string> failure_names;
  for (const auto& f : d.failures()) failure_names.push_back(f.name);
  std::sort(failure_names.begin(), failure_names.end());

  std::vector<LearnAttempt> attempts;
  for (const auto& name : failure_names) {
    for (const Statistic st : all_statistics) {
      LearnAttempt attempt;
      attempt.failure = name;
      attempt.statistic = st;
      LearnerConfig config = base;
      config.statistic = st;
      const auto start = std::chrono::steady_clock::now();
      try {
        const BalancedDataset balanced = balance(d, name);
        attempt.tree = learn(balanced, name, config);
      } catch (const Error& e) {
        attempt.skip_reason = e.what();
      }
      attempt.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start)
                               .count();
      attempts.push_back(std::move(attempt));
    }
  }
  return attempts;
}

}  // namespace ftlearn

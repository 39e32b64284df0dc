#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ftlearn/bool_column.hpp"
#include "ftlearn/dataset.hpp"
#include "ftlearn/errors.hpp"

namespace ftlearn {

/// AND fails only when all inputs fail; OR fails when any input fails.
enum class GateType { And, Or };

inline const char* to_string(GateType t) { return t == GateType::And ? "and" : "or"; }

inline GateType gate_type_from_string(std::string_view s) {
  if (s == "and") return GateType::And;
  if (s == "or") return GateType::Or;
  throw ParseError("unknown gate type '" + std::string(s) + "' (expected and or or)");
}

/**
 * Joint counts of two Boolean columns over their jointly present rows.
 * First index is the output event, second the gate expression.
 */
struct ContingencyTable {
  std::uint64_t n11 = 0, n10 = 0, n01 = 0, n00 = 0;

  std::uint64_t total() const { return n11 + n10 + n01 + n00; }

  ContingencyTable scaled(std::uint64_t k) const {
    return {n11 * k, n10 * k, n01 * k, n00 * k};
  }
};

inline ContingencyTable contingency(const BoolColumn& a, const BoolColumn& b) {
  if (a.size() != b.size()) throw DataError("misaligned Boolean columns");
  const auto& av = a.value_words();
  const auto& am = a.valid_words();
  const auto& bv = b.value_words();
  const auto& bm = b.valid_words();
  std::uint64_t n11 = 0, na = 0, nb = 0, nn = 0;
  for (std::size_t w = 0; w < av.size(); ++w) {
    const std::uint64_t both = am[w] & bm[w];
    n11 += std::popcount(av[w] & bv[w]);
    na += std::popcount(av[w] & bm[w]);  // a=1 among jointly present rows
    nb += std::popcount(bv[w] & am[w]);
    nn += std::popcount(both);
  }
  if (nn == 0) throw DataError("no jointly present rows");
  return ContingencyTable{n11, na - n11, nb - n11, nn - na - nb + n11};
}

/**
 * Phi coefficient of a 2x2 table, in [-1, 1]: 1 on complete agreement,
 * -1 on complete disagreement, 0 when either variable is constant.
 *
 * Computed from cell proportions rather than raw counts, so uniformly
 * duplicating every row leaves the result bit-identical.
 */
inline double phi(const ContingencyTable& t) {
  if (t.total() == 0) throw DataError("empty contingency table");
  // A zero marginal means one variable is constant: no association signal.
  if (t.n11 + t.n10 == 0 || t.n01 + t.n00 == 0 || t.n11 + t.n01 == 0 ||
      t.n10 + t.n00 == 0)
    return 0.0;
  if (t.n10 == 0 && t.n01 == 0) return 1.0;
  if (t.n11 == 0 && t.n00 == 0) return -1.0;
  const double n = static_cast<double>(t.total());
  const double p11 = static_cast<double>(t.n11) / n;
  const double p10 = static_cast<double>(t.n10) / n;
  const double p01 = static_cast<double>(t.n01) / n;
  const double p00 = static_cast<double>(t.n00) / n;
  // The two square roots pair the row marginals and the column marginals,
  // so transposing the table gives a bit-identical denominator.
  const double den =
      std::sqrt((p11 + p10) * (p01 + p00)) * std::sqrt((p11 + p01) * (p10 + p00));
  return std::clamp((p11 * p00 - p10 * p01) / den, -1.0, 1.0);
}

/** Candidate gate: type plus references into a caller-owned input set. */
struct GateCandidate {
  GateType gate_type = GateType::And;
  std::vector<std::size_t> inputs;  // distinct, 2..max_inputs entries
  double significance = 0.0;        // phi against the output event, in [-1, 1]
};

/**
 * Elementwise AND/OR of the input columns. A row with any missing input is
 * missing in the output.
 */
inline BoolColumn eval_gate(GateType type, std::span<const BoolColumn* const> inputs) {
  if (inputs.size() < 2) throw DataError("gate needs at least 2 inputs");
  const std::size_t n = inputs.front()->size();
  for (const auto* col : inputs)
    if (col->size() != n) throw DataError("misaligned gate inputs");

  std::vector<std::uint64_t> bits = inputs.front()->value_words();
  std::vector<std::uint64_t> valid = inputs.front()->valid_words();
  for (std::size_t k = 1; k < inputs.size(); ++k) {
    const auto& v = inputs[k]->value_words();
    const auto& m = inputs[k]->valid_words();
    for (std::size_t w = 0; w < bits.size(); ++w) {
      valid[w] &= m[w];
      if (type == GateType::And)
        bits[w] &= v[w];
      else
        bits[w] |= v[w];
    }
  }
  // from_words masks OR results of partially missing rows back to missing
  return BoolColumn::from_words(n, std::move(bits), std::move(valid));
}

inline BoolColumn eval_gate(GateType type, const std::vector<BoolColumn>& inputs) {
  std::vector<const BoolColumn*> ptrs;
  ptrs.reserve(inputs.size());
  for (const auto& c : inputs) ptrs.push_back(&c);
  return eval_gate(type, std::span<const BoolColumn* const>(ptrs));
}

/**
 * Significance of a candidate gate: phi between the output event column and
 * the gate expression over the given input columns. Stored into the
 * candidate as a side effect.
 */
inline double gate_significance(GateCandidate& g,
                                std::span<const BoolColumn* const> input_columns,
                                const BoolColumn& output) {
  const BoolColumn expr = eval_gate(g.gate_type, input_columns);
  g.significance = phi(contingency(output, expr));
  return g.significance;
}

/// Failure columns are complete by construction, so every row is present.
inline BoolColumn to_bool_column(const FailureColumn& f) {
  BoolColumn col(f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) col.set(i, f.values[i] != 0);
  return col;
}

}  // namespace ftlearn

#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "ftlearn/errors.hpp"

namespace ftlearn {

/**
 * Boolean column with per-row missingness, packed into two bitplanes
 * (values and validity) so that gate evaluation and contingency counting
 * run word-parallel. Invariants: value bits of missing rows are 0, and
 * bits beyond size() are 0 in both planes.
 */
class BoolColumn {
 public:
  BoolColumn() = default;

  /// Column of n rows, all present and false.
  explicit BoolColumn(std::size_t n)
      : n_(n), bits_(word_count(n), 0), valid_(word_count(n), 0) {
    if (n == 0) return;
    for (std::size_t w = 0; w + 1 < valid_.size(); ++w) valid_[w] = ~std::uint64_t{0};
    valid_.back() = tail_mask(n);
  }

  std::size_t size() const { return n_; }

  void set(std::size_t i, bool v) {
    valid_[i >> 6] |= bit(i);
    if (v)
      bits_[i >> 6] |= bit(i);
    else
      bits_[i >> 6] &= ~bit(i);
  }

  void set_missing(std::size_t i) {
    valid_[i >> 6] &= ~bit(i);
    bits_[i >> 6] &= ~bit(i);
  }

  std::optional<bool> at(std::size_t i) const {
    if (!(valid_[i >> 6] & bit(i))) return std::nullopt;
    return (bits_[i >> 6] & bit(i)) != 0;
  }

  std::size_t count_valid() const {
    std::size_t c = 0;
    for (auto w : valid_) c += std::popcount(w);
    return c;
  }

  /// Number of present rows holding 1.
  std::size_t count_ones() const {
    std::size_t c = 0;
    for (auto w : bits_) c += std::popcount(w);
    return c;
  }

  const std::vector<std::uint64_t>& value_words() const { return bits_; }
  const std::vector<std::uint64_t>& valid_words() const { return valid_; }

  bool operator==(const BoolColumn&) const = default;

  /// Logical complement on present rows; missing rows stay missing.
  BoolColumn negated() const {
    BoolColumn out = *this;
    for (std::size_t w = 0; w < out.bits_.size(); ++w)
      out.bits_[w] = ~out.bits_[w] & out.valid_[w];
    return out;
  }

  static std::size_t word_count(std::size_t n) { return (n + 63) / 64; }

  /// Assembles a column from raw word planes, restoring the invariants
  /// (tail bits cleared, no value bit outside the valid plane).
  static BoolColumn from_words(std::size_t n, std::vector<std::uint64_t> bits,
                               std::vector<std::uint64_t> valid) {
    if (bits.size() != word_count(n) || valid.size() != word_count(n))
      throw Error("word plane size mismatch");
    BoolColumn out;
    out.n_ = n;
    out.bits_ = std::move(bits);
    out.valid_ = std::move(valid);
    if (n > 0) {
      out.valid_.back() &= tail_mask(n);
      for (std::size_t w = 0; w < out.bits_.size(); ++w) out.bits_[w] &= out.valid_[w];
    }
    return out;
  }

 private:
  static std::uint64_t bit(std::size_t i) { return std::uint64_t{1} << (i & 63); }

  static std::uint64_t tail_mask(std::size_t n) {
    const unsigned rem = n & 63;
    return rem == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << rem) - 1;
  }

  std::size_t n_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::uint64_t> valid_;
};

}  // namespace ftlearn

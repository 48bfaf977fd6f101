#pragma once

// Finite binary strings, partial strings over {0,1,_}, and the algebra the
// selection machinery is built on: prefix order, insertion, mask selection,
// interleaving, cylinder measure and the length-lexicographic enumeration.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "klsel/dyadic.hpp"

namespace klsel {

/// A fully defined finite binary word. Index 0 is the leftmost bit.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::vector<std::uint8_t> bits);
  BitString(std::size_t n, bool value) : bits_(n, value ? 1 : 0) {}

  // Bit stream text format: '0'/'1', whitespace ignored, '#' comments to end
  // of line. Throws klsel::Error on any other character.
  static BitString parse(std::string_view text);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  bool at(std::size_t i) const;
  void set(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }
  void push_back(bool bit) { bits_.push_back(bit ? 1 : 0); }
  void pop_back() { bits_.pop_back(); }
  void append(const BitString& other);
  void reserve(std::size_t n) { bits_.reserve(n); }

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::size_t ones() const;

  // Bits [0, n).
  BitString prefix(std::size_t n) const;
  // Bits [begin, end).
  BitString slice(std::size_t begin, std::size_t end) const;
  bool starts_with(const BitString& head) const;

  std::string str() const;

  friend bool operator==(const BitString&, const BitString&) = default;
  friend auto operator<=>(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

enum class Symbol : std::uint8_t { zero = 0, one = 1, undefined = 2 };

/// A finite word over {0, 1, undefined}, kept in canonical form: the last
/// symbol, if any, is defined. Positions past the span read as undefined.
class PartialString {
 public:
  PartialString() = default;
  explicit PartialString(std::vector<Symbol> symbols);
  explicit PartialString(const BitString& bits);

  // Like BitString::parse, with '_' for an undefined symbol.
  static PartialString parse(std::string_view text);

  // Index of the last defined symbol plus one.
  std::size_t span() const { return symbols_.size(); }
  Symbol operator[](std::size_t i) const {
    return i < symbols_.size() ? symbols_[i] : Symbol::undefined;
  }
  bool defined(std::size_t i) const { return (*this)[i] != Symbol::undefined; }
  std::size_t defined_count() const { return defined_; }
  // Undefined positions below span().
  std::size_t undefined_count() const { return symbols_.size() - defined_; }

  std::span<const Symbol> symbols() const { return symbols_; }
  // The fully defined word, when no symbol in the span is undefined.
  bool is_total() const { return defined_ == symbols_.size(); }
  BitString to_bits() const;

  std::string str() const;

  friend bool operator==(const PartialString& a, const PartialString& b) {
    return a.symbols_ == b.symbols_;
  }
  friend auto operator<=>(const PartialString& a, const PartialString& b) {
    return a.symbols_ <=> b.symbols_;
  }

 private:
  std::vector<Symbol> symbols_;
  std::size_t defined_ = 0;
};

/// x is an initial segment of y: every defined bit of x is defined in y with
/// the same value.
bool is_prefix(const PartialString& x, const PartialString& y);
bool is_prefix(const PartialString& x, const BitString& y);

/// Some string extends both.
bool compatible(const PartialString& x, const PartialString& y);

/// alpha with the bits of tau written into its undefined positions, left to
/// right. alpha is read as alpha followed by infinitely many undefined
/// symbols, so every bit of tau is placed.
PartialString insert(const PartialString& alpha, const BitString& tau);

/// The bits of a at the 1-positions of mask, in increasing position order.
/// Throws klsel::Error when the lengths differ.
BitString select_by_mask(const BitString& a, const BitString& mask);

BitString complement_mask(const BitString& mask);

/// a[0] b[0] a[1] b[1] ...; requires |a| - |b| in {0, 1}.
BitString interleave(const BitString& a, const BitString& b);
/// Even positions, odd positions.
std::pair<BitString, BitString> deinterleave(const BitString& c);

/// Cylinder measure 2^-(number of defined bits).
Dyadic measure_of(const PartialString& s);
inline Dyadic measure_of(const BitString& s) {
  return Dyadic::pow2_neg(static_cast<std::uint32_t>(s.size()));
}

/// Position in the enumeration lambda, 0, 1, 00, 01, ...:
/// rank(s) = 2^|s| - 1 + value(s). Throws for |s| > 62.
std::uint64_t rank(const BitString& s);
BitString unrank(std::uint64_t n);

/// All strings of length exactly n, in enumeration order.
std::vector<BitString> all_strings(std::size_t n);

}  // namespace klsel

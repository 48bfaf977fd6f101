#include "klsel/bitseq.hpp"

#include <algorithm>
#include <bit>

#include "klsel/error.hpp"

namespace klsel {

namespace {

// Shared tokenizer for the bit stream text format. `allow_undefined` admits
// '_' as an undefined symbol.
template <class Emit>
void scan_bits(std::string_view text, bool allow_undefined, Emit&& emit) {
  bool in_comment = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_comment) {
      if (c == '\n') in_comment = false;
      continue;
    }
    switch (c) {
      case '#':
        in_comment = true;
        break;
      case '0':
        emit(Symbol::zero);
        break;
      case '1':
        emit(Symbol::one);
        break;
      case '_':
        if (!allow_undefined) {
          throw Error("undefined symbol '_' at offset " + std::to_string(i) +
                      " in a fully defined bit string");
        }
        emit(Symbol::undefined);
        break;
      case ' ':
      case '\t':
      case '\r':
      case '\n':
        break;
      default:
        throw Error(std::string("invalid character '") + c + "' at offset " +
                    std::to_string(i));
    }
  }
}

}  // namespace

BitString::BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_) {
    if (b > 1) throw Error("BitString: symbol other than 0/1");
  }
}

BitString BitString::parse(std::string_view text) {
  BitString out;
  scan_bits(text, false, [&](Symbol s) { out.bits_.push_back(static_cast<std::uint8_t>(s)); });
  return out;
}

bool BitString::at(std::size_t i) const {
  if (i >= bits_.size()) throw Error("BitString::at: index out of range");
  return bits_[i] != 0;
}

void BitString::append(const BitString& other) {
  bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

std::size_t BitString::ones() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

BitString BitString::prefix(std::size_t n) const {
  return slice(0, std::min(n, bits_.size()));
}

BitString BitString::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > bits_.size()) throw Error("BitString::slice: bad range");
  BitString out;
  out.bits_.assign(bits_.begin() + static_cast<std::ptrdiff_t>(begin),
                   bits_.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

bool BitString::starts_with(const BitString& head) const {
  return head.size() <= size() &&
         std::equal(head.bits_.begin(), head.bits_.end(), bits_.begin());
}

std::string BitString::str() const {
  std::string out;
  out.reserve(bits_.size());
  for (auto b : bits_) out.push_back(b ? '1' : '0');
  return out;
}

PartialString::PartialString(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {
  while (!symbols_.empty() && symbols_.back() == Symbol::undefined) symbols_.pop_back();
  for (auto s : symbols_) {
    if (s != Symbol::undefined) ++defined_;
  }
}

PartialString::PartialString(const BitString& bits) : defined_(bits.size()) {
  symbols_.reserve(bits.size());
  for (auto b : bits.bits()) symbols_.push_back(b ? Symbol::one : Symbol::zero);
}

PartialString PartialString::parse(std::string_view text) {
  std::vector<Symbol> symbols;
  scan_bits(text, true, [&](Symbol s) { symbols.push_back(s); });
  return PartialString(std::move(symbols));
}

BitString PartialString::to_bits() const {
  if (!is_total()) throw Error("PartialString::to_bits: string has undefined symbols");
  BitString out;
  out.reserve(symbols_.size());
  for (auto s : symbols_) out.push_back(s == Symbol::one);
  return out;
}

std::string PartialString::str() const {
  std::string out;
  out.reserve(symbols_.size());
  for (auto s : symbols_) {
    out.push_back(s == Symbol::zero ? '0' : s == Symbol::one ? '1' : '_');
  }
  return out;
}

bool is_prefix(const PartialString& x, const PartialString& y) {
  if (x.defined_count() > y.defined_count() || x.span() > y.span()) return false;
  for (std::size_t k = 0; k < x.span(); ++k) {
    if (x[k] != Symbol::undefined && x[k] != y[k]) return false;
  }
  return true;
}

bool is_prefix(const PartialString& x, const BitString& y) {
  if (x.span() > y.size()) return false;
  for (std::size_t k = 0; k < x.span(); ++k) {
    Symbol s = x[k];
    if (s != Symbol::undefined && (s == Symbol::one) != y[k]) return false;
  }
  return true;
}

bool compatible(const PartialString& x, const PartialString& y) {
  std::size_t n = std::min(x.span(), y.span());
  for (std::size_t k = 0; k < n; ++k) {
    if (x[k] != Symbol::undefined && y[k] != Symbol::undefined && x[k] != y[k]) return false;
  }
  return true;
}

PartialString insert(const PartialString& alpha, const BitString& tau) {
  std::vector<Symbol> out(alpha.symbols().begin(), alpha.symbols().end());
  std::size_t j = 0;
  for (std::size_t x = 0; x < out.size() && j < tau.size(); ++x) {
    if (out[x] == Symbol::undefined) out[x] = tau[j++] ? Symbol::one : Symbol::zero;
  }
  for (; j < tau.size(); ++j) out.push_back(tau[j] ? Symbol::one : Symbol::zero);
  return PartialString(std::move(out));
}

BitString select_by_mask(const BitString& a, const BitString& mask) {
  if (a.size() != mask.size()) {
    throw Error("select_by_mask: length mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(mask.size()) + ")");
  }
  BitString out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask[i]) out.push_back(a[i]);
  }
  return out;
}

BitString complement_mask(const BitString& mask) {
  BitString out(mask.size(), false);
  for (std::size_t i = 0; i < mask.size(); ++i) out.set(i, !mask[i]);
  return out;
}

BitString interleave(const BitString& a, const BitString& b) {
  if (a.size() != b.size() && a.size() != b.size() + 1) {
    throw Error("interleave: need |a| - |b| in {0, 1}, got |a| = " + std::to_string(a.size()) +
                ", |b| = " + std::to_string(b.size()));
  }
  BitString out;
  out.reserve(a.size() + b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    out.push_back(a[k]);
    if (k < b.size()) out.push_back(b[k]);
  }
  return out;
}

std::pair<BitString, BitString> deinterleave(const BitString& c) {
  BitString even;
  BitString odd;
  for (std::size_t x = 0; x < c.size(); ++x) {
    (x % 2 == 0 ? even : odd).push_back(c[x]);
  }
  return {std::move(even), std::move(odd)};
}

Dyadic measure_of(const PartialString& s) {
  return Dyadic::pow2_neg(static_cast<std::uint32_t>(s.defined_count()));
}

std::uint64_t rank(const BitString& s) {
  if (s.size() > 62) throw Error("rank: string too long for a 64-bit index");
  std::uint64_t value = 0;
  for (auto b : s.bits()) value = (value << 1) | b;
  return ((std::uint64_t{1} << s.size()) - 1) + value;
}

BitString unrank(std::uint64_t n) {
  // Length L satisfies 2^L - 1 <= n < 2^(L+1) - 1.
  auto length = static_cast<std::size_t>(std::bit_width(n + 1) - 1);
  std::uint64_t value = n - ((std::uint64_t{1} << length) - 1);
  BitString out(length, false);
  for (std::size_t i = 0; i < length; ++i) {
    out.set(length - 1 - i, ((value >> i) & 1) != 0);
  }
  return out;
}

std::vector<BitString> all_strings(std::size_t n) {
  if (n > 30) throw Error("all_strings: length too large");
  std::vector<BitString> out;
  out.reserve(std::size_t{1} << n);
  std::uint64_t base = (std::uint64_t{1} << n) - 1;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) out.push_back(unrank(base + v));
  return out;
}

}  // namespace klsel

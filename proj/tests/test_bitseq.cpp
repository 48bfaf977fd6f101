#include <random>
#include <set>

#include "doctest.h"
#include "oracle.hpp"

#include "klsel/bitseq.hpp"
#include "klsel/error.hpp"

using namespace klsel;

namespace {

BitString B(const char* s) { return BitString::parse(s); }
PartialString P(const char* s) { return PartialString::parse(s); }

// Every canonical partial string with span at most n.
std::vector<PartialString> all_partial(std::size_t n) {
  std::set<PartialString> out;
  std::vector<Symbol> cur;
  auto rec = [&](auto&& self) -> void {
    out.insert(PartialString(cur));
    if (cur.size() == n) return;
    for (Symbol s : {Symbol::zero, Symbol::one, Symbol::undefined}) {
      cur.push_back(s);
      self(self);
      cur.pop_back();
    }
  };
  rec(rec);
  return {out.begin(), out.end()};
}

PartialString random_partial(std::mt19937_64& rng, std::size_t max_len) {
  std::vector<Symbol> s(rng() % (max_len + 1));
  for (auto& x : s) x = static_cast<Symbol>(rng() % 3);
  return PartialString(s);
}

}  // namespace

TEST_CASE("parse and print") {
  CHECK(B("10 1\n# comment 11\n0").str() == "1010");
  CHECK(B("").empty());
  CHECK_THROWS_AS(B("102"), Error);
  CHECK_THROWS_AS(B("1_0"), Error);
  CHECK(P("1_0__").str() == "1_0");
  CHECK(P("___").span() == 0);
  CHECK(P("1_0").defined_count() == 2);
  CHECK(P("1_0").undefined_count() == 1);
  CHECK(P("1_0")[7] == Symbol::undefined);
  CHECK(P("101").is_total());
  CHECK(P("101").to_bits() == B("101"));
  CHECK_THROWS_AS(P("1_0").to_bits(), Error);
  CHECK(B("0110").slice(1, 3) == B("11"));
  CHECK(B("0110").ones() == 2);
}

TEST_CASE("is_prefix examples") {
  CHECK(is_prefix(PartialString(), B("0110")));
  CHECK(is_prefix(P("1_0"), B("110")));
  CHECK(is_prefix(P("1_0"), B("100")));
  CHECK_FALSE(is_prefix(P("1_1"), B("100")));
  CHECK_FALSE(is_prefix(P("1_0"), B("1")));
  CHECK(is_prefix(P("1_0"), P("1_01")));
  CHECK_FALSE(is_prefix(P("110"), P("1_0")));
}

TEST_CASE("is_prefix is a partial order on span <= 5") {
  auto all = all_partial(5);
  REQUIRE(all.size() == 243);  // 1 + sum_{k=1}^{5} 2 * 3^(k-1)
  for (const auto& x : all) {
    REQUIRE(is_prefix(x, x));
    for (const auto& y : all) {
      bool xy = is_prefix(x, y);
      if (xy && is_prefix(y, x)) REQUIRE(x == y);
      if (!xy) continue;
      for (const auto& z : all) {
        if (is_prefix(y, z)) REQUIRE(is_prefix(x, z));
      }
    }
  }
}

TEST_CASE("compatible") {
  CHECK(compatible(P("1_"), P("_1")));
  CHECK_FALSE(compatible(P("1_0"), P("0")));
  CHECK(compatible(PartialString(), P("01")));
}

TEST_CASE("insert examples") {
  CHECK(insert(P("1_0_"), B("01")).str() == "1001");
  CHECK(insert(PartialString(), B("101")).str() == "101");
  CHECK(insert(P("__"), B("1")).str() == "1");
  CHECK(insert(P("1_0"), B("011")).str() == "10011");
}

TEST_CASE("insert then select returns tau") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    PartialString alpha = random_partial(rng, 10);
    BitString tau = oracle::random_bits(rng, alpha.undefined_count());
    PartialString filled = insert(alpha, tau);
    BitString mask;
    for (std::size_t z = 0; z < alpha.span(); ++z) mask.push_back(!alpha.defined(z));
    REQUIRE(filled.is_total());
    REQUIRE(select_by_mask(filled.to_bits(), mask) == tau);
    REQUIRE(is_prefix(alpha, filled));
  }
}

TEST_CASE("insert scales the measure by the bits placed") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    PartialString alpha = random_partial(rng, 10);
    BitString tau = oracle::random_bits(rng, rng() % 8);
    PartialString filled = insert(alpha, tau);
    REQUIRE(measure_of(filled) ==
            measure_of(alpha) * Dyadic::pow2_neg(static_cast<std::uint32_t>(tau.size())));
  }
}

TEST_CASE("select_by_mask examples") {
  CHECK(select_by_mask(B("10110"), B("01010")) == B("01"));
  CHECK(select_by_mask(B("1111"), B("0000")).empty());
  CHECK(select_by_mask(B("110100"), B("101101")) == B("1010"));
  CHECK_THROWS_AS(select_by_mask(B("10"), B("1")), Error);
}

TEST_CASE("complement_mask examples") {
  CHECK(complement_mask(B("0101")) == B("1010"));
  CHECK(complement_mask(BitString()).empty());
  CHECK(complement_mask(B("111")) == B("000"));
}

TEST_CASE("interleave examples") {
  CHECK(interleave(B("11"), B("00")) == B("1010"));
  CHECK(deinterleave(B("1010")) == std::pair{B("11"), B("00")});
  CHECK(interleave(B("1"), BitString()) == B("1"));
  CHECK_THROWS_AS(interleave(B("1"), B("00")), Error);
  CHECK_THROWS_AS(interleave(B("111"), B("0")), Error);
}

TEST_CASE("deinterleave inverts interleave") {
  for (std::size_t lb = 0; lb <= 4; ++lb) {
    for (std::size_t la : {lb, lb + 1}) {
      for (const auto& a : all_strings(la)) {
        for (const auto& b : all_strings(lb)) {
          REQUIRE(deinterleave(interleave(a, b)) == std::pair{a, b});
        }
      }
    }
  }
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 2000; ++trial) {
    std::size_t lb = rng() % 9;
    BitString a = oracle::random_bits(rng, lb + rng() % 2);
    BitString b = oracle::random_bits(rng, lb);
    REQUIRE(deinterleave(interleave(a, b)) == std::pair{a, b});
  }
}

TEST_CASE("measure_of examples") {
  CHECK(measure_of(PartialString()) == Dyadic(1));
  CHECK(measure_of(P("101")) == Dyadic::pow2_neg(3));
  CHECK(measure_of(P("1__1")) == Dyadic::pow2_neg(2));
}

TEST_CASE("rank and unrank") {
  CHECK(rank(BitString()) == 0);
  CHECK(rank(B("0")) == 1);
  CHECK(rank(B("1")) == 2);
  CHECK(rank(B("01")) == 4);
  CHECK(unrank(0).empty());
  CHECK(unrank(2) == B("1"));
  CHECK(unrank(4) == B("01"));
  BitString previous;
  for (std::uint64_t n = 0; n < (1u << 12); ++n) {
    BitString s = unrank(n);
    REQUIRE(rank(s) == n);
    if (n > 0) {
      REQUIRE((previous.size() < s.size() || (previous.size() == s.size() && previous < s)));
    }
    previous = s;
  }
  CHECK_THROWS_AS(rank(BitString(63, false)), Error);
}

TEST_CASE("all_strings") {
  auto three = all_strings(3);
  REQUIRE(three.size() == 8);
  CHECK(three.front() == B("000"));
  CHECK(three.back() == B("111"));
  CHECK(all_strings(0) == std::vector<BitString>{BitString()});
}

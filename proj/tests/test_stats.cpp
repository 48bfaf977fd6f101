#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "oracle.hpp"

#include "klsel/engine.hpp"
#include "klsel/error.hpp"
#include "klsel/stats.hpp"

using namespace klsel;

namespace {

BitString with_ones(std::size_t n, std::size_t ones) {
  BitString out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(k < ones);
  return out;
}

BitString alternating(std::size_t n) {
  BitString out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(k % 2 == 1);
  return out;
}

}  // namespace

TEST_CASE("prng_stream") {
  CHECK(prng_stream(5, 0).empty());
  CHECK(prng_stream(5, 1000) == prng_stream(5, 1000));
  CHECK(prng_stream(5, 1000) != prng_stream(6, 1000));
  CHECK(prng_stream(5, 100) == prng_stream(5, 1000).prefix(100));
  CHECK(std::fabs(monobit_z(prng_stream(5, std::size_t{1} << 20))) <= 4.0);
}

TEST_CASE("duplicated_stream") {
  BitString d = duplicated_stream(3, 1001);
  REQUIRE(d.size() == 1001);
  for (std::size_t k = 0; k + 1 < d.size(); k += 2) REQUIRE(d[k] == d[k + 1]);
}

TEST_CASE("monobit_z examples") {
  CHECK(monobit_z(with_ones(100, 50)) == 0.0);
  CHECK(monobit_z(with_ones(100, 60)) == doctest::Approx(2.0));
  CHECK(monobit_z(BitString(400, true)) == doctest::Approx(20.0));
  CHECK_THROWS_AS(monobit_z(BitString(99, true)), Error);
}

TEST_CASE("runs_z examples") {
  // Every bit starts a run: runs = n, mean 2 n0 n1 / n + 1.
  const double n = 1000, n0 = 500, n1 = 500;
  const double mu = 2 * n0 * n1 / n + 1;
  const double var = 2 * n0 * n1 * (2 * n0 * n1 - n) / (n * n * (n - 1));
  auto z = runs_z(alternating(1000));
  REQUIRE(z.has_value());
  CHECK(*z == doctest::Approx((n - mu) / std::sqrt(var)));
  CHECK(*z == doctest::Approx(31.575).epsilon(1e-4));
  CHECK(std::fabs(*runs_z(prng_stream(9, std::size_t{1} << 16))) <= 4.0);
  CHECK_FALSE(runs_z(BitString(200, false)).has_value());
  CHECK_FALSE(runs_z(with_ones(1000, 400)).has_value());
  CHECK(runs_z(with_ones(1000, 401)).has_value());
  CHECK_THROWS_AS(runs_z(alternating(50)), Error);
}

TEST_CASE("block_independence_chi2 examples") {
  BitString x = prng_stream(1, 10000);
  Chi2Result same = block_independence_chi2(x, x, 1);
  CHECK(same.dof == 1);
  CHECK(same.chi2 == doctest::Approx(10000.0));

  Chi2Result indep =
      block_independence_chi2(prng_stream(1, std::size_t{1} << 20), prng_stream(2, std::size_t{1} << 20), 2);
  CHECK(indep.dof == 9);
  CHECK(indep.chi2 >= chi2_region(9).lower);
  CHECK(indep.chi2 <= chi2_region(9).upper);

  Chi2Result flat = block_independence_chi2(BitString(10000, false), x, 1);
  CHECK(flat.degenerate);

  CHECK(block_independence_chi2(x, x, 3).dof == 49);
  CHECK_THROWS_AS(block_independence_chi2(x, x, 0), Error);
  CHECK_THROWS_AS(block_independence_chi2(x, x, 5), Error);
  CHECK_THROWS_AS(block_independence_chi2(x, x.prefix(1599), 2), Error);
}

TEST_CASE("chi-square cutoffs match the chi-square quantiles") {
  for (const auto& r : kChi2Regions) {
    CAPTURE(r.dof);
    boost::math::chi_squared dist(static_cast<double>(r.dof));
    CHECK(r.lower == doctest::Approx(boost::math::quantile(dist, 5e-7)).epsilon(1e-9));
    CHECK(r.upper ==
          doctest::Approx(boost::math::quantile(boost::math::complement(dist, 5e-7))).epsilon(1e-9));
  }
  CHECK_THROWS_AS(chi2_region(4), Error);
}

TEST_CASE("independence_battery examples") {
  BitString stream = prng_stream(42, std::size_t{1} << 20);
  StatsReport ok = independence_battery(build_from_spec("pair-swap"), stream);
  CHECK(ok.pass());
  CHECK(ok.errors.empty());
  CHECK(ok.entries.size() == 5);
  CHECK(ok.q_star_length == std::size_t{1} << 19);
  CHECK(ok.q_star_length + ok.n_length == stream.size());

  StatsReport bad =
      independence_battery(build_from_spec("pair-swap"), duplicated_stream(42, std::size_t{1} << 20));
  CHECK_FALSE(bad.pass());
  CHECK_FALSE(bad.entries.back().pass);

  StatsReport all = independence_battery(build_from_spec("mc-mask:1"), stream);
  CHECK_FALSE(all.pass());
  CHECK(all.errors.size() == 1);
  CHECK(all.entries.empty());
}

TEST_CASE("negative control is overwhelmingly dependent") {
  BitString dup = duplicated_stream(7, std::size_t{1} << 20);
  auto trace = run(build_from_spec("pair-swap"), dup);
  REQUIRE(trace.q_star == trace.n_prefix);
  Chi2Result r = block_independence_chi2(trace.q_star, trace.n_prefix, 1);
  CHECK(r.chi2 >= 0.9 * static_cast<double>(r.blocks));
}

TEST_CASE("pair-swap splits the input in half") {
  for (std::size_t n : {1000, 1001, 4096}) {
    auto trace = run(build_from_spec("pair-swap"), prng_stream(n, n));
    CHECK(trace.q_star.size() + trace.n_prefix.size() == trace.h_final);
    CHECK(trace.q_star.size() + 1 >= n / 2);
    CHECK(trace.q_star.size() <= (n + 1) / 2);
  }
}

TEST_CASE("reports are deterministic") {
  auto make = [] {
    StatsReport r = independence_battery(build_from_spec("skip-on-one"),
                                         prng_stream(99, std::size_t{1} << 18));
    r.seed = 99;
    return r.to_json().dump() + r.to_text();
  };
  CHECK(make() == make());
}

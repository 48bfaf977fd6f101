#pragma once

// A small statistical battery for selected and nonselected subsequences:
// frequency, runs, and positional block independence. It illustrates
// independence on a pseudorandom stream; it does not certify randomness.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "klsel/bitseq.hpp"
#include "klsel/rules.hpp"

namespace klsel {

/// n bits from std::mt19937_64 seeded with `seed`, each 64-bit output
/// consumed least significant bit first.
BitString prng_stream(std::uint64_t seed, std::size_t n);

/// The pair-swap negative control: bit 2k+1 repeats bit 2k.
BitString duplicated_stream(std::uint64_t seed, std::size_t n);

/// (2 ones - n) / sqrt(n). Throws klsel::Error for fewer than 100 bits.
double monobit_z(const BitString& bits);

/// Wald-Wolfowitz runs statistic conditional on the ones count. Empty when the
/// ones proportion lies outside (0.4, 0.6). Throws for fewer than 100 bits.
std::optional<double> runs_z(const BitString& bits);

struct Chi2Result {
  double chi2 = 0;
  std::size_t dof = 0;
  std::size_t blocks = 0;
  // A row or column of the contingency table is empty; independence cannot
  // be tested and chi2 is meaningless.
  bool degenerate = false;
};

/// Pearson chi-square of the 2^L x 2^L contingency table of aligned L-bit
/// blocks of x and y. Requires L in 1..4 and min(|x|, |y|) >= 100 * 4^L.
Chi2Result block_independence_chi2(const BitString& x, const BitString& y,
                                   std::size_t block_len);

/// Central chi-square quantiles at 5e-7 and 1 - 5e-7, i.e. the acceptance
/// region of a two-sided test at total level 1e-6. Values from
/// scipy.stats.chi2.ppf.
struct Chi2Region {
  std::size_t dof;
  double lower;
  double upper;
};
inline constexpr Chi2Region kChi2Regions[] = {
    {1, 3.9269908169877694e-13, 25.26382072590819},
    {9, 0.19519342928962174, 46.4348367220341},
    {49, 14.721918461369073, 113.47302983780085},
    {225, 136.04109034432332, 344.447711885721},
};
/// Throws for a dof not in the table.
const Chi2Region& chi2_region(std::size_t dof);

inline constexpr double kZLimit = 4.0;
inline constexpr std::size_t kMinSubsequence = std::size_t{1} << 14;
inline constexpr std::size_t kBatteryBlockLen = 2;

struct StatsEntry {
  std::string test_name;
  double statistic = 0;
  std::string threshold_description;
  bool pass = false;
  bool skipped = false;
  std::string note;
};

struct StatsReport {
  std::string rule;
  std::uint64_t seed = 0;
  std::size_t stream_length = 0;
  std::size_t q_star_length = 0;
  std::size_t n_length = 0;
  std::vector<StatsEntry> entries;
  std::vector<std::string> errors;  // unmet preconditions

  // No errors and every non-skipped entry passes.
  bool pass() const;
  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
};

/// Runs the rule on `input` and tests Q* and N: monobit and runs on each
/// (|z| <= 4), and block chi-square between them at block length 2 inside the
/// two-sided 1e-6 region. Both subsequences need at least 2^14 bits; a
/// shortfall is reported in `errors`, not thrown.
StatsReport independence_battery(const SelectionRule& rule, const BitString& input);

}  // namespace klsel

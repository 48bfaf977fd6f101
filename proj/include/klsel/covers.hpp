#pragma once

// Exact measure arithmetic over sets of strings and the three cover
// constructions:
//   * transfer_cover_subseq: a cover of selected subsequences pulled back to a
//     cover of the input (total measure per source string <= its own measure);
//   * build_cover_pair: the cover of sigma (+) tau built from a test relative
//     to the odd half;
//   * build_cover_main: the cover of the input built from a test on the
//     nonselected bits relative to the selected bits, via S(sigma, tau).
//
// A test is abstracted as a TestEnumerator: enumerate(tau, steps) is the
// finite set of strings a step-bounded computation with oracle prefix tau
// has enumerated.

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "klsel/bitseq.hpp"
#include "klsel/dyadic.hpp"
#include "klsel/reconstruct.hpp"
#include "klsel/rules.hpp"

namespace klsel {

/// Contract, for all tau and budgets:
///   * enumerate(tau, 0) is empty;
///   * budget-monotone: steps <= steps'  =>  enumerate(tau, steps) is a subset
///     of enumerate(tau, steps');
///   * extension-consistent: tau <= tau'  =>  enumerate(tau, steps) is a
///     subset of enumerate(tau', steps);
///   * use-bounded: enumerate(tau, steps) depends only on tau[0..steps-1]; a
///     computation of `steps` steps cannot have read further.
/// Implementations must be pure. Results are sorted and duplicate-free.
class TestEnumerator {
 public:
  virtual ~TestEnumerator() = default;
  virtual std::vector<BitString> enumerate(const BitString& tau, std::size_t steps) const = 0;
};

/// Checks the contract exhaustively for |tau| <= max_tau_len and
/// steps <= max_tau_len + 1. Throws ContractViolation.
void check_enumerator_contract(const TestEnumerator& e, std::size_t max_tau_len);

/// Emits `emit` at every (tau, steps) with tau_prefix <= tau and
/// steps >= step.
struct EnumeratorRecord {
  BitString tau_prefix;
  std::size_t step = 1;
  std::vector<BitString> emit;
};

/// Table-driven enumerator. The JSON form is a list of
/// {"tau_prefix": "bits", "step": int, "emit": ["bits", ...]}.
class TableEnumerator final : public TestEnumerator {
 public:
  TableEnumerator() = default;
  // Throws ContractViolation for step 0 or |tau_prefix| > step.
  explicit TableEnumerator(std::vector<EnumeratorRecord> records);

  static TableEnumerator from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  const std::vector<EnumeratorRecord>& records() const { return records_; }
  std::vector<BitString> enumerate(const BitString& tau, std::size_t steps) const override;

 private:
  std::vector<EnumeratorRecord> records_;
};

struct RandomEnumeratorOptions {
  std::size_t max_records = 10;
  std::size_t max_prefix_len = 4;
  std::size_t max_extra_steps = 3;
  std::size_t max_emits = 3;
  std::size_t max_emit_len = 5;
};

/// A random contract-valid table: each record waits at least |tau_prefix|
/// steps, and emitted strings are short so that measures straddle the
/// 2^-i budgets.
TableEnumerator random_enumerator(std::mt19937_64& rng, const RandomEnumeratorOptions& opts = {});

/// A finite set of partial strings, optionally asserted pairwise
/// incompatible (checked on construction).
class PrefixSet {
 public:
  PrefixSet() = default;
  // Throws klsel::Error if disjointness is asserted but two members are
  // compatible.
  PrefixSet(std::vector<PartialString> members, bool assert_disjoint);

  const std::vector<PartialString>& members() const { return members_; }
  bool disjoint() const { return disjoint_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  // Largest span of any member.
  std::size_t span() const;

 private:
  std::vector<PartialString> members_;
  bool disjoint_ = false;
};

/// Sum of member measures; requires asserted disjointness.
Dyadic measure_disjoint(const PrefixSet& s);

/// Measure of the union of cylinders, counted point by point over all 2^span
/// completions. The brute-force reference for every union measure.
Dyadic measure_union_exact(std::span<const PartialString> strings, std::size_t span);
Dyadic measure_union_exact(std::span<const BitString> strings, std::size_t span);

/// Measure of the union of intervals of fully defined strings: the sum over
/// members that have no proper prefix in the set.
Dyadic measure_union(std::span<const BitString> strings);

struct CountingResult {
  bool holds = false;       // lhs <= c
  bool hypothesis = false;  // every branch sum <= c
  Dyadic lhs;               // sum_j sum_{|tau| = j} 2^-|tau| f(tau)
  Dyadic max_branch_sum;
};

/// Tree averaging bound: if every root-to-leaf branch of the depth-s tree
/// sums to at most c, the level averages sum to at most c. Throws when f is
/// missing a string of length <= s.
CountingResult check_counting(const std::map<BitString, Dyadic>& f, const Dyadic& c,
                              std::size_t s);

struct TransferSource {
  BitString sigma;
  std::vector<PartialString> alphas;
  Dyadic measure;                 // sum of alpha measures
  // Each cut branch weighted by 2^-(defined bits + sigma bits still unread).
  // For a total rule, measure + incomplete_measure = 2^-|sigma|.
  Dyadic incomplete_measure;
  std::size_t incomplete = 0;     // branches cut by the depth bound
  std::size_t divergent = 0;      // branches where the rule diverged or repeated
};

struct TransferCover {
  PrefixSet cover;  // all alphas, not asserted disjoint across sources
  std::vector<TransferSource> sources;
  std::vector<std::string> warnings;
};

/// For each sigma, simulates the rule on an undefined alpha: selected steps
/// take the next bit of sigma, unselected steps split alpha on both values.
/// alpha is emitted when sigma is used up. Branches still running after
/// `depth` steps are dropped with a warning.
TransferCover transfer_cover_subseq(const SelectionRule& rule, std::span<const BitString> cover,
                                    std::size_t depth);

/// The sigma (+) tau cover with |sigma| = |tau| = s: pairs such that some
/// sigma' <= sigma lies in enumerate(tau', |tau'|) for a tau' <= tau whose
/// enumerated set has measure <= 2^-i. Strings have length 2s.
std::vector<BitString> build_cover_pair(const TestEnumerator& e, std::size_t i, std::size_t s);

/// max{ r <= |tau| : measure(enumerate(tau, r)) <= 2^-i }.
std::size_t t_of_tau(const TestEnumerator& e, const BitString& tau, std::size_t i);

struct CoverMember {
  PartialString alpha;
  BitString sigma;
  BitString tau;
};

struct TauEntry {
  BitString tau;
  std::size_t t = 0;
  std::vector<BitString> enumerated;   // enumerate(tau, t)
  std::vector<BitString> basis;        // B(tau)
  std::vector<BitString> initial;      // B*(tau)
  Dyadic initial_measure;              // Pr(B*(tau))
};

struct MainCover {
  PrefixSet cover;                   // distinct S(sigma, tau), sigma in B(tau)
  std::vector<CoverMember> members;  // provenance, one per (sigma, tau)
  std::vector<TauEntry> per_tau;     // every tau with |tau| <= s, enumeration order
  std::size_t i = 0;
  std::size_t s = 0;
  std::size_t sigma_bound = 0;
  // max over tau of the sum of Pr(B*(tau')) for tau' <= tau.
  Dyadic max_branch_sum;
  // sum over tau of 2^-|tau| Pr(B*(tau)); bounds the cover measure.
  Dyadic weighted_initial_sum;
  bool initial_union_prefix_free = true;
};

struct CoverLimits {
  // Cap on s * 2^s * 2^sigma_bound.
  std::uint64_t max_work = std::uint64_t{1} << 24;
};

/// The cover of every sigma with |sigma| <= sigma_bound against every tau with
/// |tau| <= s, with B(tau), the initial strings B*(tau), and the quantities
/// that bound the cover measure: whether the union of B*(tau') over the
/// prefixes of each tau is prefix-free, the largest such branch sum, and the
/// level-weighted sum. Throws ContractViolation for a bad enumerator and
/// klsel::Error when s * 2^s * 2^sigma_bound exceeds the work limit.
///
/// sigma is initial in B(tau) when no pair (sigma', tau') other than
/// (sigma, tau) with sigma' <= sigma, tau' <= tau has sigma' in B(tau').
MainCover build_cover_main(const TestEnumerator& e, const ReconstructionTable& table,
                           std::size_t i);
MainCover build_cover_main(const TestEnumerator& e, const SelectionRule& rule, std::size_t i,
                           std::size_t s, std::size_t sigma_bound, const CoverLimits& limits = {});

/// measure_union_exact(cover, span) <= 2^-i. Throws if span > 24 or a member
/// has a defined bit at or past span.
bool verify_cover_bound(const PrefixSet& cover, std::size_t i, std::size_t span);

}  // namespace klsel

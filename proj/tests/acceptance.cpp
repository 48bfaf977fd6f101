// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "klsel/covers.hpp"
#include "klsel/engine.hpp"
#include "klsel/reconstruct.hpp"
#include "klsel/rules.hpp"
#include "klsel/stats.hpp"

using namespace klsel;

namespace {

// Pinned limits.
constexpr double kClaim1SecondsLimit = 60.0;
constexpr double kMainCoverSecondsLimit = 300.0;
constexpr std::size_t kClaim1Inputs = 1000;
constexpr std::size_t kClaim1Trials = 8;
constexpr std::size_t kMaxInputLength = 256;
constexpr std::size_t kCountingInstances = 10000;
constexpr std::size_t kCountingMaxDepth = 8;
constexpr std::size_t kPairEnumerators = 1000;
constexpr std::size_t kPairMaxS = 10;
constexpr std::size_t kMainEnumerators = 200;
constexpr std::size_t kMainS = 8;
constexpr std::size_t kMainSigmaBound = 8;
constexpr std::size_t kMaxLevel = 6;
constexpr std::size_t kTransferCovers = 1000;
constexpr std::size_t kTransferDepth = 12;
constexpr std::size_t kEngineInputs = 1000;
constexpr std::size_t kStatsLength = std::size_t{1} << 20;
constexpr std::uint64_t kStatsSeed = 20240601;
constexpr double kNegativeControlFraction = 0.9;
constexpr int kDeterminismRepeats = 3;

const std::array<const char*, 7> kRules = {"mc-mask:1",     "mc-mask:10",       "mc-mask:10110",
                                           "pair-swap",     "skip-on-one",      "threshold-ones:2",
                                           "threshold-ones:3"};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

BitString random_bits(std::mt19937_64& rng, std::size_t n) {
  BitString out;
  for (std::size_t k = 0; k < n; ++k) out.push_back((rng() & 1) != 0);
  return out;
}

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& body) {
  auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.1fs", seconds_since(start));
  std::cout << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << title << ": " << o.detail
            << " [" << secs << "]" << std::endl;
}

// AC1
Outcome claim1_suite() {
  auto start = Clock::now();
  std::mt19937_64 rng(1);
  ClaimReport total;
  for (const char* spec : kRules) {
    SelectionRule rule = build_from_spec(spec);
    for (std::size_t n = 0; n < kClaim1Inputs; ++n) {
      BitString input = random_bits(rng, uniform(rng, 1, kMaxInputLength));
      total.merge(verify_claim1(rule, input, kClaim1Trials, rng()));
    }
  }
  double secs = seconds_since(start);
  auto line = [](const char* name, const ClaimCheck& c) {
    return std::string(name) + " " + std::to_string(c.failed) + "/" + std::to_string(c.checked);
  };
  std::string detail = std::to_string(total.checkpoints) + " checkpoints; failures " +
                       line("(i)", total.monotone) + ", " + line("(ii)", total.no_extension) +
                       ", " + line("(iii)", total.measure) + ", " +
                       line("(iv)", total.soundness) + ", " + line("(v)", total.convergence) +
                       "; " + std::to_string(static_cast<int>(secs)) + "s <= " +
                       std::to_string(static_cast<int>(kClaim1SecondsLimit)) + "s";
  if (!total.failures.empty()) detail += "; first: " + total.failures.front();
  bool exercised = total.monotone.checked > 0 && total.no_extension.checked > 0;
  return {total.ok() && exercised && secs <= kClaim1SecondsLimit, detail};
}

// AC2: f is built top-down so that every branch stays within c.
std::map<BitString, Dyadic> branch_bounded(std::mt19937_64& rng, const Dyadic& c, std::size_t s) {
  std::map<BitString, Dyadic> f;
  std::vector<std::pair<BitString, Dyadic>> frontier{{BitString(), c}};
  while (!frontier.empty()) {
    auto [tau, remaining] = frontier.back();
    frontier.pop_back();
    // A random fraction m / 2^6 of what the branch has left.
    Dyadic take = remaining * Dyadic(Dyadic::Integer(uniform(rng, 0, 64)), 6);
    f[tau] = take;
    if (tau.size() == s) continue;
    Dyadic left = remaining - take;
    for (bool b : {false, true}) {
      BitString child = tau;
      child.push_back(b);
      frontier.emplace_back(std::move(child), left);
    }
  }
  return f;
}

Outcome tree_averaging() {
  std::mt19937_64 rng(2);
  std::size_t violations = 0;
  std::size_t hypothesis_failures = 0;
  for (std::size_t n = 0; n < kCountingInstances; ++n) {
    std::size_t s = uniform(rng, 0, kCountingMaxDepth);
    Dyadic c(Dyadic::Integer(uniform(rng, 0, 1024)), static_cast<std::uint32_t>(uniform(rng, 0, 12)));
    auto r = check_counting(branch_bounded(rng, c, s), c, s);
    if (!r.hypothesis) ++hypothesis_failures;
    if (!r.holds || r.lhs > c) ++violations;
  }
  std::size_t equality_failures = 0;
  for (std::size_t s = 0; s <= kCountingMaxDepth; ++s) {
    for (std::uint32_t k = 0; k <= 4; ++k) {
      // c = (s + 1) 2^-k, so c / (s + 1) is dyadic.
      Dyadic per_level = Dyadic::pow2_neg(k);
      Dyadic c = Dyadic(s + 1) * per_level;
      std::map<BitString, Dyadic> f;
      for (std::size_t len = 0; len <= s; ++len) {
        for (const auto& tau : all_strings(len)) f[tau] = per_level;
      }
      auto r = check_counting(f, c, s);
      if (!(r.hypothesis && r.lhs == c)) ++equality_failures;
    }
  }
  return {violations == 0 && hypothesis_failures == 0 && equality_failures == 0,
          std::to_string(kCountingInstances) + " instances, s <= " +
              std::to_string(kCountingMaxDepth) + ": " + std::to_string(violations) +
              " conclusion violations, " + std::to_string(hypothesis_failures) +
              " generator misses; equality case exact in " +
              std::to_string(45 - equality_failures) + "/45"};
}

// AC3
Outcome pair_cover_bound() {
  std::mt19937_64 rng(3);
  std::size_t violations = 0;
  std::size_t nonempty = 0;
  for (std::size_t n = 0; n < kPairEnumerators; ++n) {
    TableEnumerator e = random_enumerator(rng);
    std::size_t i = uniform(rng, 1, kMaxLevel);
    std::size_t s = uniform(rng, 0, kPairMaxS);
    auto cover = build_cover_pair(e, i, s);
    if (!cover.empty()) ++nonempty;
    Dyadic m = measure_union_exact(std::span<const BitString>(cover), 2 * s);
    if (m > Dyadic::pow2_neg(static_cast<std::uint32_t>(i))) ++violations;
  }
  return {violations == 0 && nonempty > 0,
          std::to_string(kPairEnumerators) + " enumerators, i in 1.." + std::to_string(kMaxLevel) +
              ", s <= " + std::to_string(kPairMaxS) + ": " + std::to_string(violations) +
              " bound violations (" + std::to_string(nonempty) + " nonempty covers)"};
}

// AC4
Outcome main_cover_bound() {
  auto start = Clock::now();
  std::mt19937_64 rng(4);
  std::size_t cases = 0;
  std::size_t violations = 0;
  std::size_t nonempty = 0;
  std::size_t premises = 0;
  std::size_t membership_failures = 0;
  for (const char* spec : kRules) {
    SelectionRule rule = build_from_spec(spec);
    ReconstructionTable table(rule, kMainS, kMainSigmaBound);
    for (std::size_t n = 0; n < kMainEnumerators; ++n) {
      TableEnumerator e = random_enumerator(rng);
      std::size_t i = uniform(rng, 1, kMaxLevel);
      MainCover mc = build_cover_main(e, table, i);
      ++cases;
      if (!mc.cover.empty()) ++nonempty;
      if (!verify_cover_bound(mc.cover, i, mc.cover.span()) || !mc.initial_union_prefix_free ||
          mc.max_branch_sum > Dyadic::pow2_neg(static_cast<std::uint32_t>(i))) {
        ++violations;
      }

      // Membership: a run whose checkpoint pair is caught by the test is
      // covered by a member that is a prefix of the input.
      BitString input = random_bits(rng, kMaxInputLength);
      for (const auto& cp : resolved_checkpoints(run(rule, input), input)) {
        if (cp.tau.size() > kMainS || cp.sigma.size() > kMainSigmaBound) continue;
        const TauEntry& entry = mc.per_tau[rank(cp.tau)];
        bool caught = std::any_of(entry.enumerated.begin(), entry.enumerated.end(),
                                  [&](const BitString& w) { return cp.sigma.starts_with(w); });
        if (!caught) continue;
        ++premises;
        const auto& alpha = table.at(cp.sigma, cp.tau);
        bool member = alpha && is_prefix(*alpha, input) &&
                      std::binary_search(mc.cover.members().begin(), mc.cover.members().end(),
                                         *alpha);
        if (!member) ++membership_failures;
      }
    }
  }
  double secs = seconds_since(start);
  return {violations == 0 && membership_failures == 0 && premises > 0 &&
              secs <= kMainCoverSecondsLimit,
          std::to_string(cases) + " (enumerator, rule) cases, s = " + std::to_string(kMainS) +
              ", sigma_bound = " + std::to_string(kMainSigmaBound) + ": " +
              std::to_string(violations) + " bound violations (" + std::to_string(nonempty) +
              " nonempty); membership " + std::to_string(membership_failures) +
              " failures over " + std::to_string(premises) + " covered checkpoints; " +
              std::to_string(static_cast<int>(secs)) + "s <= " +
              std::to_string(static_cast<int>(kMainCoverSecondsLimit)) + "s"};
}

// AC5
Outcome transfer_bound() {
  std::mt19937_64 rng(5);
  std::size_t sources = 0;
  std::size_t violations = 0;
  std::size_t dropped = 0;
  std::size_t unbalanced = 0;
  for (const char* spec : kRules) {
    SelectionRule rule = build_from_spec(spec);
    for (std::size_t n = 0; n < kTransferCovers; ++n) {
      std::vector<BitString> cover(uniform(rng, 1, 4));
      for (auto& s : cover) s = random_bits(rng, uniform(rng, 0, 6));
      auto tc = transfer_cover_subseq(rule, cover, kTransferDepth);
      for (const auto& src : tc.sources) {
        ++sources;
        dropped += src.incomplete;
        if (src.measure > measure_of(src.sigma)) ++violations;
        // Emitted and cut mass together account for sigma exactly.
        if (src.measure + src.incomplete_measure != measure_of(src.sigma)) ++unbalanced;
      }
    }
  }
  return {violations == 0 && unbalanced == 0,
          std::to_string(sources) + " source strings over " +
                               std::to_string(kRules.size()) + " rules x " +
                               std::to_string(kTransferCovers) + " covers, depth " +
                               std::to_string(kTransferDepth) + ": " + std::to_string(violations) +
                               " violations; " + std::to_string(unbalanced) +
                               " sources where emitted plus cut mass differs from 2^-|sigma| (" +
                               std::to_string(dropped) + " branches cut at depth)"};
}

// AC6
Outcome engine_invariants() {
  std::mt19937_64 rng(6);
  std::size_t partition_failures = 0;
  std::size_t blindness_failures = 0;
  std::size_t flips = 0;
  for (const char* spec : kRules) {
    SelectionRule rule = build_from_spec(spec);
    for (std::size_t n = 0; n < kEngineInputs; ++n) {
      BitString input = random_bits(rng, uniform(rng, 1, kMaxInputLength));
      SelectionTrace trace = run(rule, input);

      BitString merged(trace.h_final, false);
      std::size_t qi = 0;
      for (std::size_t k = 0; k < trace.steps(); ++k) {
        if (!trace.rho[k]) continue;
        if (trace.positions[k] < trace.h_final) merged.set(trace.positions[k], trace.q_star[qi]);
        ++qi;
      }
      std::size_t ni = 0;
      for (std::size_t z = 0; z < trace.h_final; ++z) {
        if (!trace.mask_b[z]) merged.set(z, trace.n_prefix[ni++]);
      }
      if (ni != trace.n_prefix.size() || merged != input.prefix(trace.h_final)) {
        ++partition_failures;
      }

      for (std::size_t k = 0; k < trace.steps(); ++k) {
        BitString flipped = input;
        flipped.set(trace.positions[k], !input[trace.positions[k]]);
        SelectionTrace other = run(rule, flipped, k + 1);
        ++flips;
        if (other.steps() <= k || other.positions[k] != trace.positions[k] ||
            other.rho[k] != trace.rho[k]) {
          ++blindness_failures;
        }
      }
    }
  }
  return {partition_failures == 0 && blindness_failures == 0,
          std::to_string(kEngineInputs) + " inputs per rule: " +
              std::to_string(partition_failures) + " partition failures, " +
              std::to_string(blindness_failures) + " blindness failures over " +
              std::to_string(flips) + " flips"};
}

// AC7
Outcome statistical_battery() {
  BitString stream = prng_stream(kStatsSeed, kStatsLength);
  bool ok = true;
  std::string detail;
  for (const char* spec : {"pair-swap", "skip-on-one", "mc-mask:10"}) {
    StatsReport r = independence_battery(build_from_spec(spec), stream);
    bool all = r.errors.empty() && r.entries.size() == 5;
    for (const auto& e : r.entries) all = all && e.pass && !e.skipped;
    ok = ok && all;
    char chi[32];
    std::snprintf(chi, sizeof chi, "%.2f", r.entries.empty() ? 0.0 : r.entries.back().statistic);
    detail += std::string(spec) + (all ? " ok" : " FAILED") + " (chi2(9) " + chi + "); ";
  }
  BitString dup = duplicated_stream(kStatsSeed, kStatsLength);
  SelectionTrace trace = run(build_from_spec("pair-swap"), dup);
  Chi2Result neg = block_independence_chi2(trace.q_star, trace.n_prefix, 1);
  bool caught = neg.chi2 >= kNegativeControlFraction * static_cast<double>(neg.blocks);
  char buf[96];
  std::snprintf(buf, sizeof buf, "negative control chi2(1) %.0f vs %.1f x %zu blocks", neg.chi2,
                kNegativeControlFraction, neg.blocks);
  detail += buf;
  return {ok && caught, "seed " + std::to_string(kStatsSeed) + ", |z| <= 4, " + detail};
}

// AC8
std::string capture(const std::string& command) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return "<popen failed>";
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  if (status == -1) return "<pclose failed>";
  return out;
}

Outcome cli_determinism() {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "klsel_acceptance";
  fs::create_directories(dir);
  fs::path table = dir / "table.json";
  {
    std::mt19937_64 rng(8);
    std::ofstream f(table);
    f << random_enumerator(rng).to_json().dump(2);
  }
  fs::path input = dir / "input.bits";
  {
    std::mt19937_64 rng(9);
    std::ofstream f(input);
    f << random_bits(rng, 4096).str() << "\n";
  }
  const std::string tool = KLSEL_TOOL_PATH;
  const std::vector<std::string> commands = {
      "select --rule pair-swap --input " + input.string() + " --json",
      "select --rule threshold-ones:3 --input " + input.string() + " --json",
      "reconstruct --rule skip-on-one --sigma 0110 --tau 101 --json",
      "cover --mode pair --enum " + table.string() + " --i 2 --s 6 --json",
      "cover --mode main --enum " + table.string() +
          " --rule pair-swap --i 2 --s 6 --sigma-bound 6 --json",
      "cover --mode transfer --rule mc-mask:10110 --strings 0,101,11 --json",
      "stats --rule skip-on-one --seed 17 --length 1048576 --json",
  };
  std::size_t mismatches = 0;
  std::size_t invalid = 0;
  for (const auto& args : commands) {
    std::string first = capture("'" + tool + "' " + args + " 2>/dev/null");
    try {
      auto parsed = nlohmann::json::parse(first);
      if (parsed.is_discarded()) ++invalid;
    } catch (const std::exception&) {
      ++invalid;
    }
    for (int r = 1; r < kDeterminismRepeats; ++r) {
      if (capture("'" + tool + "' " + args + " 2>/dev/null") != first) ++mismatches;
    }
  }
  fs::remove_all(dir);
  return {mismatches == 0 && invalid == 0,
          std::to_string(commands.size()) + " commands x " + std::to_string(kDeterminismRepeats) +
              " runs: " + std::to_string(mismatches) + " byte mismatches, " +
              std::to_string(invalid) + " non-JSON outputs"};
}

}  // namespace

int main() {
  report("AC1", "reconstruction claims over built-in rules", claim1_suite);
  report("AC2", "tree averaging bound", tree_averaging);
  report("AC3", "pair cover measure", pair_cover_bound);
  report("AC4", "main cover measure and membership", main_cover_bound);
  report("AC5", "transfer cover per-source measure", transfer_bound);
  report("AC6", "engine partition and blindness", engine_invariants);
  report("AC7", "statistical battery and negative control", statistical_battery);
  report("AC8", "CLI output determinism", cli_determinism);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}

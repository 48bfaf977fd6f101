#include "klsel/covers.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include "klsel/error.hpp"

namespace klsel {

namespace {

void sort_unique(std::vector<BitString>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool is_subset(const std::vector<BitString>& a, const std::vector<BitString>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::string describe(const BitString& tau, std::size_t steps) {
  return "(tau=" + tau.str() + ", steps=" + std::to_string(steps) + ")";
}

std::vector<BitString> normalized(const TestEnumerator& e, const BitString& tau,
                                  std::size_t steps) {
  auto out = e.enumerate(tau, steps);
  sort_unique(out);
  return out;
}

}  // namespace

void check_enumerator_contract(const TestEnumerator& e, std::size_t max_tau_len) {
  if (max_tau_len > 20) throw Error("check_enumerator_contract: max_tau_len above 20");
  for (std::size_t len = 0; len <= max_tau_len; ++len) {
    for (const auto& tau : all_strings(len)) {
      std::vector<BitString> previous;
      for (std::size_t r = 0; r <= max_tau_len + 1; ++r) {
        auto current = normalized(e, tau, r);
        if (r == 0 && !current.empty()) {
          throw ContractViolation("enumerator emits at zero budget " + describe(tau, 0));
        }
        if (!is_subset(previous, current)) {
          throw ContractViolation("enumerator is not budget-monotone at " + describe(tau, r));
        }
        if (!tau.empty() && !is_subset(normalized(e, tau.prefix(len - 1), r), current)) {
          throw ContractViolation("enumerator is not extension-consistent at " +
                                  describe(tau, r));
        }
        if (r < len && normalized(e, tau.prefix(r), r) != current) {
          throw ContractViolation("enumerator reads oracle bits past its budget at " +
                                  describe(tau, r));
        }
        previous = std::move(current);
      }
    }
  }
}

TableEnumerator::TableEnumerator(std::vector<EnumeratorRecord> records)
    : records_(std::move(records)) {
  for (std::size_t k = 0; k < records_.size(); ++k) {
    const auto& r = records_[k];
    if (r.step == 0) {
      throw ContractViolation("record " + std::to_string(k) + ": step must be at least 1");
    }
    if (r.tau_prefix.size() > r.step) {
      throw ContractViolation("record " + std::to_string(k) + ": tau_prefix of length " +
                              std::to_string(r.tau_prefix.size()) + " cannot be read in " +
                              std::to_string(r.step) + " steps");
    }
  }
}

TableEnumerator TableEnumerator::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ContractViolation("enumerator table must be a JSON array");
  std::vector<EnumeratorRecord> records;
  try {
    for (const auto& item : j) {
      EnumeratorRecord r;
      r.tau_prefix = BitString::parse(item.at("tau_prefix").get<std::string>());
      auto step = item.at("step").get<long long>();
      if (step < 0) throw ContractViolation("negative step in enumerator table");
      r.step = static_cast<std::size_t>(step);
      for (const auto& s : item.at("emit")) r.emit.push_back(BitString::parse(s.get<std::string>()));
      records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("malformed enumerator table: ") + e.what());
  }
  return TableEnumerator(std::move(records));
}

nlohmann::ordered_json TableEnumerator::to_json() const {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : records_) {
    nlohmann::ordered_json item;
    item["tau_prefix"] = r.tau_prefix.str();
    item["step"] = r.step;
    auto emit = nlohmann::ordered_json::array();
    for (const auto& s : r.emit) emit.push_back(s.str());
    item["emit"] = std::move(emit);
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<BitString> TableEnumerator::enumerate(const BitString& tau, std::size_t steps) const {
  std::vector<BitString> out;
  for (const auto& r : records_) {
    if (steps >= r.step && tau.starts_with(r.tau_prefix)) {
      out.insert(out.end(), r.emit.begin(), r.emit.end());
    }
  }
  sort_unique(out);
  return out;
}

TableEnumerator random_enumerator(std::mt19937_64& rng, const RandomEnumeratorOptions& opts) {
  auto uniform = [&rng](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  auto random_bits = [&](std::size_t n) {
    BitString b;
    for (std::size_t k = 0; k < n; ++k) b.push_back(uniform(0, 1) == 1);
    return b;
  };
  std::vector<EnumeratorRecord> records(uniform(0, opts.max_records));
  for (auto& r : records) {
    r.tau_prefix = random_bits(uniform(0, opts.max_prefix_len));
    r.step = std::max<std::size_t>(1, r.tau_prefix.size()) + uniform(0, opts.max_extra_steps);
    std::size_t emits = uniform(1, std::max<std::size_t>(1, opts.max_emits));
    for (std::size_t k = 0; k < emits; ++k) r.emit.push_back(random_bits(uniform(1, opts.max_emit_len)));
  }
  return TableEnumerator(std::move(records));
}

PrefixSet::PrefixSet(std::vector<PartialString> members, bool assert_disjoint)
    : members_(std::move(members)), disjoint_(assert_disjoint) {
  if (!assert_disjoint) return;
  for (std::size_t a = 0; a < members_.size(); ++a) {
    for (std::size_t b = a + 1; b < members_.size(); ++b) {
      if (compatible(members_[a], members_[b])) {
        throw Error("PrefixSet: members " + members_[a].str() + " and " + members_[b].str() +
                    " are not disjoint");
      }
    }
  }
}

std::size_t PrefixSet::span() const {
  std::size_t out = 0;
  for (const auto& m : members_) out = std::max(out, m.span());
  return out;
}

Dyadic measure_disjoint(const PrefixSet& s) {
  if (!s.disjoint()) throw Error("measure_disjoint: set is not asserted disjoint");
  Dyadic total;
  for (const auto& m : s.members()) total += measure_of(m);
  return total;
}

Dyadic measure_union_exact(std::span<const PartialString> strings, std::size_t span) {
  if (span > 24) throw Error("measure_union_exact: span " + std::to_string(span) + " above 24");
  std::vector<PartialString> unique(strings.begin(), strings.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  const std::uint64_t points = std::uint64_t{1} << span;
  const std::uint64_t all = points - 1;
  std::vector<std::uint64_t> hit((points + 63) / 64, 0);
  for (const auto& s : unique) {
    if (s.span() > span) {
      throw Error("measure_union_exact: " + s.str() + " has defined bits past span " +
                  std::to_string(span));
    }
    // Point bit k is position k.
    std::uint64_t fixed = 0;
    std::uint64_t value = 0;
    for (std::size_t k = 0; k < s.span(); ++k) {
      if (s[k] == Symbol::undefined) continue;
      fixed |= std::uint64_t{1} << k;
      if (s[k] == Symbol::one) value |= std::uint64_t{1} << k;
    }
    const std::uint64_t free = all & ~fixed;
    std::uint64_t sub = 0;
    do {
      std::uint64_t p = value | sub;
      hit[p >> 6] |= std::uint64_t{1} << (p & 63);
      sub = (sub - free) & free;
    } while (sub != 0);
  }
  std::uint64_t count = 0;
  for (auto w : hit) count += static_cast<std::uint64_t>(std::popcount(w));
  return Dyadic(Dyadic::Integer(count), static_cast<std::uint32_t>(span));
}

Dyadic measure_union_exact(std::span<const BitString> strings, std::size_t span) {
  std::vector<PartialString> partial;
  partial.reserve(strings.size());
  for (const auto& s : strings) partial.emplace_back(s);
  return measure_union_exact(partial, span);
}

Dyadic measure_union(std::span<const BitString> strings) {
  std::vector<BitString> sorted(strings.begin(), strings.end());
  sort_unique(sorted);
  Dyadic total;
  const BitString* kept = nullptr;
  for (const auto& s : sorted) {
    // Extensions of a string follow it contiguously in lexicographic order.
    if (kept && s.starts_with(*kept)) continue;
    total += measure_of(s);
    kept = &s;
  }
  return total;
}

CountingResult check_counting(const std::map<BitString, Dyadic>& f, const Dyadic& c,
                              std::size_t s) {
  if (s > 24) throw Error("check_counting: depth above 24");
  auto value = [&f](const BitString& tau) -> const Dyadic& {
    auto it = f.find(tau);
    if (it == f.end()) throw Error("check_counting: f is undefined at '" + tau.str() + "'");
    return it->second;
  };

  CountingResult out;
  out.hypothesis = true;
  // Level sums.
  for (std::size_t j = 0; j <= s; ++j) {
    Dyadic level;
    for (const auto& tau : all_strings(j)) level += value(tau);
    out.lhs += level.scaled_down(static_cast<std::uint32_t>(j));
  }
  // Branch sums, depth first.
  struct Frame {
    BitString tau;
    Dyadic sum;
  };
  std::vector<Frame> stack{{BitString{}, value(BitString{})}};
  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();
    if (fr.tau.size() == s) {
      if (fr.sum > c) out.hypothesis = false;
      if (fr.sum > out.max_branch_sum) out.max_branch_sum = fr.sum;
      continue;
    }
    for (bool b : {false, true}) {
      BitString child = fr.tau;
      child.push_back(b);
      Dyadic sum = fr.sum + value(child);
      stack.push_back({std::move(child), std::move(sum)});
    }
  }
  out.holds = out.lhs <= c;
  return out;
}

TransferCover transfer_cover_subseq(const SelectionRule& rule, std::span<const BitString> cover,
                                    std::size_t depth) {
  TransferCover out;
  std::vector<PartialString> all;

  struct Branch {
    RuleState state;
    std::vector<Symbol> alpha;
    std::size_t next = 0;  // next unread bit of sigma
    std::size_t steps = 0;
  };

  for (const auto& sigma : cover) {
    TransferSource source;
    source.sigma = sigma;
    std::vector<Branch> stack;
    stack.push_back({rule.start(), {}, 0, 0});
    while (!stack.empty()) {
      Branch br = std::move(stack.back());
      stack.pop_back();
      for (;;) {
        if (br.next == sigma.size()) {
          source.alphas.emplace_back(br.alpha);
          break;
        }
        if (br.steps >= depth) {
          // Every step defines exactly one position of alpha.
          ++source.incomplete;
          source.incomplete_measure +=
              Dyadic::pow2_neg(static_cast<std::uint32_t>(br.steps + sigma.size() - br.next));
          break;
        }
        auto f = br.state.next_position();
        auto g = br.state.select();
        if (!f || !g) {
          ++source.divergent;
          break;
        }
        if (br.alpha.size() <= *f) br.alpha.resize(*f + 1, Symbol::undefined);
        // Every examined position is defined in alpha, so this is a repeat.
        if (br.alpha[*f] != Symbol::undefined) {
          ++source.divergent;
          break;
        }
        ++br.steps;
        if (*g) {
          bool bit = sigma[br.next++];
          br.alpha[*f] = bit ? Symbol::one : Symbol::zero;
          br.state.advance(bit);
        } else {
          Branch other = br;
          other.alpha[*f] = Symbol::one;
          other.state.advance(true);
          stack.push_back(std::move(other));
          br.alpha[*f] = Symbol::zero;
          br.state.advance(false);
        }
      }
    }
    for (const auto& a : source.alphas) source.measure += measure_of(a);
    if (source.incomplete > 0) {
      out.warnings.push_back("sigma=" + sigma.str() + ": " + std::to_string(source.incomplete) +
                             " branch(es) still running after " + std::to_string(depth) +
                             " steps were dropped");
    }
    if (source.divergent > 0) {
      out.warnings.push_back("sigma=" + sigma.str() + ": " + std::to_string(source.divergent) +
                             " branch(es) dropped on rule divergence or repeated position");
    }
    all.insert(all.end(), source.alphas.begin(), source.alphas.end());
    out.sources.push_back(std::move(source));
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  out.cover = PrefixSet(std::move(all), false);
  return out;
}

std::vector<BitString> build_cover_pair(const TestEnumerator& e, std::size_t i, std::size_t s) {
  if (s > 12) throw Error("build_cover_pair: s above 12");
  check_enumerator_contract(e, s);
  const Dyadic budget = Dyadic::pow2_neg(static_cast<std::uint32_t>(i));

  // Strings enumerated under each admissible tau' (budget |tau'|), by rank.
  std::vector<std::vector<BitString>> admissible((std::size_t{2} << s) - 1);
  for (std::size_t len = 0; len <= s; ++len) {
    for (const auto& tp : all_strings(len)) {
      auto w = normalized(e, tp, len);
      if (measure_union(w) <= budget) admissible[rank(tp)] = std::move(w);
    }
  }

  std::vector<BitString> out;
  const std::size_t width = std::size_t{1} << s;
  std::vector<std::uint8_t> qualifies(width);
  for (const auto& tau : all_strings(s)) {
    std::fill(qualifies.begin(), qualifies.end(), 0);
    for (std::size_t len = 0; len <= s; ++len) {
      for (const auto& w : admissible[rank(tau.prefix(len))]) {
        if (w.size() > s) continue;
        // sigma ranges over the extensions of w of length s.
        std::size_t base = 0;
        for (auto b : w.bits()) base = (base << 1) | b;
        base <<= (s - w.size());
        std::fill_n(qualifies.begin() + static_cast<std::ptrdiff_t>(base),
                    std::size_t{1} << (s - w.size()), 1);
      }
    }
    const std::uint64_t first = (std::uint64_t{1} << s) - 1;
    for (std::size_t v = 0; v < width; ++v) {
      if (qualifies[v]) out.push_back(interleave(unrank(first + v), tau));
    }
  }
  sort_unique(out);
  return out;
}

std::size_t t_of_tau(const TestEnumerator& e, const BitString& tau, std::size_t i) {
  const Dyadic budget = Dyadic::pow2_neg(static_cast<std::uint32_t>(i));
  for (std::size_t r = tau.size(); r > 0; --r) {
    if (measure_union(normalized(e, tau, r)) <= budget) return r;
  }
  return 0;
}

MainCover build_cover_main(const TestEnumerator& e, const SelectionRule& rule, std::size_t i,
                           std::size_t s, std::size_t sigma_bound, const CoverLimits& limits) {
  if (s > 16 || sigma_bound > 16 ||
      static_cast<std::uint64_t>(std::max<std::size_t>(s, 1)) << (s + sigma_bound) >
          limits.max_work) {
    throw Error("build_cover_main: s * 2^s * 2^sigma_bound exceeds the work limit");
  }
  if (!rule.is_bounded()) throw Error("build_cover_main: rule is not bounded");
  return build_cover_main(e, ReconstructionTable(rule, s, sigma_bound), i);
}

MainCover build_cover_main(const TestEnumerator& e, const ReconstructionTable& table,
                           std::size_t i) {
  const std::size_t s = table.tau_bound();
  const std::size_t sigma_bound = table.sigma_bound();
  check_enumerator_contract(e, s);

  MainCover out;
  out.i = i;
  out.s = s;
  out.sigma_bound = sigma_bound;

  const std::uint64_t tau_count = (std::uint64_t{1} << (s + 1)) - 1;
  const std::uint64_t sigma_count = (std::uint64_t{1} << (sigma_bound + 1)) - 1;
  out.per_tau.resize(tau_count);
  // union_below[r]: B(tau') over all tau' <= tau (tau of rank r).
  std::vector<std::set<BitString>> union_below(tau_count);
  std::vector<Dyadic> branch_sum(tau_count);
  std::vector<PartialString> alphas;

  for (std::uint64_t r = 0; r < tau_count; ++r) {
    TauEntry& entry = out.per_tau[r];
    entry.tau = unrank(r);
    entry.t = t_of_tau(e, entry.tau, i);
    entry.enumerated = normalized(e, entry.tau, entry.t);
    std::set<BitString> enumerated(entry.enumerated.begin(), entry.enumerated.end());

    for (std::uint64_t sr = 0; sr < sigma_count; ++sr) {
      BitString sigma = unrank(sr);
      const auto& alpha = table.at(sigma, entry.tau);
      if (!alpha) continue;
      bool covered = false;
      for (std::size_t len = 0; len <= sigma.size() && !covered; ++len) {
        covered = enumerated.count(sigma.prefix(len)) > 0;
      }
      if (!covered) continue;
      entry.basis.push_back(sigma);
      out.members.push_back({*alpha, sigma, entry.tau});
      alphas.push_back(*alpha);
    }

    const std::set<BitString>* parent_union = nullptr;
    if (!entry.tau.empty()) parent_union = &union_below[rank(entry.tau.prefix(entry.tau.size() - 1))];
    union_below[r] = parent_union ? *parent_union : std::set<BitString>{};
    union_below[r].insert(entry.basis.begin(), entry.basis.end());

    for (const auto& sigma : entry.basis) {
      if (parent_union && parent_union->count(sigma)) continue;
      bool has_proper_prefix = false;
      for (std::size_t len = 0; len < sigma.size() && !has_proper_prefix; ++len) {
        has_proper_prefix = union_below[r].count(sigma.prefix(len)) > 0;
      }
      if (has_proper_prefix) continue;
      entry.initial.push_back(sigma);
      entry.initial_measure += measure_of(sigma);
    }

    branch_sum[r] = entry.initial_measure;
    if (parent_union) branch_sum[r] += branch_sum[rank(entry.tau.prefix(entry.tau.size() - 1))];
    if (branch_sum[r] > out.max_branch_sum) out.max_branch_sum = branch_sum[r];
    out.weighted_initial_sum +=
        entry.initial_measure.scaled_down(static_cast<std::uint32_t>(entry.tau.size()));
  }

  // The initial strings along each full-length branch, as a multiset, must be
  // prefix-free; in sorted order it suffices to compare neighbours.
  for (const auto& leaf : all_strings(s)) {
    std::vector<BitString> path;
    for (std::size_t len = 0; len <= s; ++len) {
      const auto& init = out.per_tau[rank(leaf.prefix(len))].initial;
      path.insert(path.end(), init.begin(), init.end());
    }
    std::sort(path.begin(), path.end());
    for (std::size_t k = 1; k < path.size(); ++k) {
      if (path[k].starts_with(path[k - 1])) out.initial_union_prefix_free = false;
    }
  }

  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  out.cover = PrefixSet(std::move(alphas), false);
  return out;
}

bool verify_cover_bound(const PrefixSet& cover, std::size_t i, std::size_t span) {
  return measure_union_exact(cover.members(), span) <=
         Dyadic::pow2_neg(static_cast<std::uint32_t>(i));
}

}  // namespace klsel

#include "klsel/reconstruct.hpp"

#include <algorithm>
#include <random>
#include <utility>

#include "klsel/engine.hpp"
#include "klsel/error.hpp"

namespace klsel {

std::string_view to_string(Divergence d) {
  switch (d) {
    case Divergence::sigma_short:
      return "sigma-short";
    case Divergence::tau_exhausted:
      return "tau-exhausted";
    case Divergence::rule_divergence:
      return "rule-divergence";
    case Divergence::stage_limit:
      return "stage-limit";
  }
  return "unknown";
}

std::string ReconstructionOutcome::tag() const {
  return converged() ? "converged" : std::string(to_string(*divergence));
}

std::size_t default_stage_limit(std::size_t sigma_len, std::size_t tau_len) {
  return 4 * (sigma_len + tau_len) + 8;
}

namespace {

// State of one run of the construction. The window [0, h) only grows for a
// valid rule; below the window alpha is frozen, so the sigma slot of every
// undefined position there is fixed once the window passes it.
class Construction {
 public:
  enum class Dispatch { case1, needs_tau, diverged };

  Construction(const SelectionRule& rule, const BitString& sigma)
      : state_(rule.start()), sigma_(&sigma) {}

  std::size_t stages() const { return stages_; }
  std::size_t tau_read() const { return t_; }

  // Opens the next stage: computes h and u. Returns a reason on divergence.
  std::optional<Divergence> open_stage() {
    ++stages_;
    auto h = state_.threshold();
    if (!h) return Divergence::rule_divergence;
    h_ = *h;
    if (h_ >= frontier_) {
      grow(h_);
      for (std::size_t z = frontier_; z < h_; ++z) {
        slot_[z] = alpha_[z] == Symbol::undefined ? static_cast<std::int64_t>(u_++) : -1;
      }
    } else {
      // H went down; only possible for a rule that is not nondecreasing.
      u_ = static_cast<std::size_t>(
          std::count_if(slot_.begin(), slot_.begin() + static_cast<std::ptrdiff_t>(h_),
                        [](std::int64_t s) { return s >= 0; }));
    }
    frontier_ = h_;
    if (sigma_->size() < u_) return Divergence::sigma_short;
    return std::nullopt;
  }

  bool can_terminate(std::size_t tau_len) const { return u_ == sigma_->size() && t_ == tau_len; }

  Dispatch dispatch() {
    auto f = state_.next_position();
    if (!f) return Dispatch::diverged;
    f_ = *f;
    grow(f_ + 1);
    if (examined_[f_]) return Dispatch::diverged;
    if (f_ >= h_) return Dispatch::needs_tau;
    // Case 1: the bit is already known from alpha*.
    bool bit = alpha_[f_] != Symbol::undefined ? alpha_[f_] == Symbol::one
                                               : (*sigma_)[static_cast<std::size_t>(slot_[f_])];
    examined_[f_] = 1;
    state_.advance(bit);
    return Dispatch::case1;
  }

  // Case 2: write the next tau bit at F(xi-hat).
  void consume_tau(bool bit) {
    alpha_[f_] = bit ? Symbol::one : Symbol::zero;
    examined_[f_] = 1;
    ++t_;
    state_.advance(bit);
  }

  // alpha* for the current stage.
  PartialString result() const {
    std::vector<Symbol> out(alpha_);
    for (std::size_t z = 0; z < frontier_; ++z) {
      if (slot_[z] >= 0) out[z] = (*sigma_)[static_cast<std::size_t>(slot_[z])] ? Symbol::one : Symbol::zero;
    }
    return PartialString(std::move(out));
  }

 private:
  void grow(std::size_t n) {
    if (alpha_.size() < n) {
      alpha_.resize(n, Symbol::undefined);
      examined_.resize(n, 0);
      slot_.resize(n, -1);
    }
  }

  RuleState state_;
  const BitString* sigma_;
  std::vector<Symbol> alpha_;
  std::vector<std::uint8_t> examined_;
  std::vector<std::int64_t> slot_;  // sigma index for undefined z < frontier_
  std::size_t frontier_ = 0;
  std::size_t u_ = 0;
  std::size_t h_ = 0;
  std::size_t f_ = 0;
  std::size_t t_ = 0;
  std::size_t stages_ = 0;
};

ReconstructionOutcome diverged(Divergence d, std::size_t stages) {
  return ReconstructionOutcome{std::nullopt, d, stages};
}

}  // namespace

ReconstructionOutcome reconstruct(const SelectionRule& rule, const BitString& sigma,
                                  const BitString& tau, std::optional<std::size_t> max_stages) {
  if (!rule.is_bounded()) {
    throw Error("reconstruct: rule '" + rule.name() + "' is not a bounded rule");
  }
  const std::size_t limit = max_stages.value_or(default_stage_limit(sigma.size(), tau.size()));
  Construction c(rule, sigma);
  for (;;) {
    if (c.stages() >= limit) return diverged(Divergence::stage_limit, c.stages());
    if (auto d = c.open_stage()) return diverged(*d, c.stages());
    if (c.can_terminate(tau.size())) return ReconstructionOutcome{c.result(), std::nullopt, c.stages()};
    switch (c.dispatch()) {
      case Construction::Dispatch::case1:
        break;
      case Construction::Dispatch::diverged:
        return diverged(Divergence::rule_divergence, c.stages());
      case Construction::Dispatch::needs_tau:
        if (c.tau_read() >= tau.size()) return diverged(Divergence::tau_exhausted, c.stages());
        c.consume_tau(tau[c.tau_read()]);
        break;
    }
  }
}

std::vector<BitString> converging_extensions(const SelectionRule& rule, const BitString& sigma,
                                             const BitString& tau, std::size_t extra) {
  if (!rule.is_bounded()) {
    throw Error("converging_extensions: rule '" + rule.name() + "' is not a bounded rule");
  }
  const std::size_t max_len = tau.size() + extra;
  const std::size_t limit = default_stage_limit(sigma.size(), max_len);

  struct Node {
    Construction c;
    BitString read;  // tau bits consumed so far
  };
  std::vector<BitString> found;
  std::vector<Node> stack;
  stack.push_back({Construction(rule, sigma), {}});
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    bool recorded = false;
    for (;;) {
      if (node.c.stages() >= limit) break;
      if (node.c.open_stage()) break;
      if (!recorded && node.c.can_terminate(node.read.size())) {
        // First stage with t = |read| and u = |sigma|: S(sigma, read) converges.
        if (node.read.size() > tau.size()) found.push_back(node.read);
        recorded = true;
      }
      auto d = node.c.dispatch();
      if (d == Construction::Dispatch::diverged) break;
      if (d == Construction::Dispatch::case1) continue;
      const std::size_t t = node.c.tau_read();
      if (t < tau.size()) {
        node.c.consume_tau(tau[t]);
        node.read.push_back(tau[t]);
      } else if (t < max_len) {
        Node other{node.c, node.read};
        other.c.consume_tau(true);
        other.read.push_back(true);
        stack.push_back(std::move(other));
        node.c.consume_tau(false);
        node.read.push_back(false);
      } else {
        break;
      }
      recorded = false;
    }
  }
  std::sort(found.begin(), found.end());
  return found;
}

void ClaimReport::merge(const ClaimReport& other) {
  auto add = [](ClaimCheck& a, const ClaimCheck& b) {
    a.checked += b.checked;
    a.failed += b.failed;
  };
  add(monotone, other.monotone);
  add(no_extension, other.no_extension);
  add(measure, other.measure);
  add(soundness, other.soundness);
  add(convergence, other.convergence);
  checkpoints += other.checkpoints;
  for (const auto& f : other.failures) {
    if (failures.size() >= 16) break;
    failures.push_back(f);
  }
}

namespace {

void record(ClaimReport& report, ClaimCheck& check, bool ok, const std::string& what) {
  ++check.checked;
  if (ok) return;
  ++check.failed;
  if (report.failures.size() < 16) report.failures.push_back(what);
}

std::string pair_str(const BitString& sigma, const BitString& tau) {
  return "(sigma=" + sigma.str() + ", tau=" + tau.str() + ")";
}

}  // namespace

ClaimReport verify_claim1(const SelectionRule& rule, const BitString& input, std::size_t trials,
                          std::uint64_t seed) {
  ClaimReport report;
  const SelectionTrace trace = run(rule, input);
  const std::vector<Checkpoint> cps = resolved_checkpoints(trace, input);
  report.checkpoints = cps.size();

  std::vector<std::optional<PartialString>> alphas;
  alphas.reserve(cps.size());
  for (const auto& cp : cps) {
    auto out = reconstruct(rule, cp.sigma, cp.tau);
    record(report, report.convergence, out.converged(),
           "(v) checkpoint " + std::to_string(cp.stage) + " " + pair_str(cp.sigma, cp.tau) +
               " diverged: " + out.tag());
    if (out.converged()) {
      record(report, report.measure,
             out.result->defined_count() == cp.sigma.size() + cp.tau.size(),
             "(iii) " + pair_str(cp.sigma, cp.tau) + " -> " + out.result->str());
      record(report, report.soundness, is_prefix(*out.result, input),
             "(iv) " + pair_str(cp.sigma, cp.tau) + " -> " + out.result->str() +
                 " is not a prefix of the input");
    }
    alphas.push_back(std::move(out.result));
  }

  // (i) and (v) along the checkpoint chain; prefix order is transitive, so
  // consecutive pairs cover all pairs.
  for (std::size_t j = 1; j < cps.size(); ++j) {
    record(report, report.convergence,
           cps[j - 1].sigma.size() <= cps[j].sigma.size() &&
               cps[j].sigma.starts_with(cps[j - 1].sigma) &&
               cps[j].tau.starts_with(cps[j - 1].tau),
           "(v) checkpoint " + std::to_string(cps[j].stage) + " does not extend the previous one");
    if (alphas[j - 1] && alphas[j]) {
      record(report, report.monotone, is_prefix(*alphas[j - 1], *alphas[j]),
             "(i) " + alphas[j - 1]->str() + " is not a prefix of " + alphas[j]->str());
    }
  }

  if (cps.empty()) return report;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_cp(0, cps.size() - 1);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t j = pick_cp(rng);
    const Checkpoint& cp = cps[j];
    if (!alphas[j]) continue;

    // (i) off the checkpoints: any convergent pair below (sigma, tau).
    {
      std::uniform_int_distribution<std::size_t> sl(0, cp.sigma.size());
      std::uniform_int_distribution<std::size_t> tl(0, cp.tau.size());
      BitString sigma_p = cp.sigma.prefix(sl(rng));
      BitString tau_p = cp.tau.prefix(tl(rng));
      auto out = reconstruct(rule, sigma_p, tau_p);
      if (out.converged()) {
        record(report, report.monotone, is_prefix(*out.result, *alphas[j]),
               "(i) S" + pair_str(sigma_p, tau_p) + " = " + out.result->str() +
                   " is not a prefix of S" + pair_str(cp.sigma, cp.tau) + " = " +
                   alphas[j]->str());
      }
    }

    // (ii): a proper prefix of sigma never converges with a proper extension
    // of tau.
    if (!cp.sigma.empty()) {
      std::uniform_int_distribution<std::size_t> sl(0, cp.sigma.size() - 1);
      BitString sigma_p = cp.sigma.prefix(sl(rng));
      auto ext = converging_extensions(rule, sigma_p, cp.tau, kExtensionSearchDepth);
      record(report, report.no_extension, ext.empty(),
             "(ii) S(" + sigma_p.str() + ", " + (ext.empty() ? "" : ext.front().str()) +
                 ") converges although S" + pair_str(cp.sigma, cp.tau) + " does");
    }
  }
  return report;
}

ReconstructionTable::ReconstructionTable(const SelectionRule& rule, std::size_t tau_bound,
                                         std::size_t sigma_bound)
    : tau_bound_(tau_bound), sigma_bound_(sigma_bound), rule_name_(rule.name()) {
  if (tau_bound > 16 || sigma_bound > 16) throw Error("ReconstructionTable: bounds above 16");
  const std::uint64_t sigma_count = (std::uint64_t{1} << (sigma_bound + 1)) - 1;
  const std::uint64_t tau_count = (std::uint64_t{1} << (tau_bound + 1)) - 1;
  entries_.resize(sigma_count * tau_count);
  for (std::uint64_t tr = 0; tr < tau_count; ++tr) {
    BitString tau = unrank(tr);
    for (std::uint64_t sr = 0; sr < sigma_count; ++sr) {
      entries_[tr * sigma_count + sr] = reconstruct(rule, unrank(sr), tau).result;
    }
  }
}

const std::optional<PartialString>& ReconstructionTable::at(const BitString& sigma,
                                                            const BitString& tau) const {
  if (sigma.size() > sigma_bound_ || tau.size() > tau_bound_) {
    throw Error("ReconstructionTable::at: lengths outside the table");
  }
  const std::uint64_t sigma_count = (std::uint64_t{1} << (sigma_bound_ + 1)) - 1;
  return entries_[rank(tau) * sigma_count + rank(sigma)];
}

}  // namespace klsel

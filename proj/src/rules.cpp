#include "klsel/rules.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_set>

#include "klsel/error.hpp"

namespace klsel {

std::optional<bool> RuleState::select() const {
  if (kind_ == RuleKind::general) return cursor_->select_flag();
  auto f = cursor_->next_position();
  auto h = cursor_->threshold();
  if (!f || !h) return std::nullopt;
  return *f >= *h;
}

SelectionRule::SelectionRule(RuleKind kind, std::string name, Factory factory)
    : kind_(kind), name_(std::move(name)), factory_(std::move(factory)) {
  if (!factory_) throw Error("SelectionRule: empty cursor factory");
}

RuleState SelectionRule::state_after(const BitString& history) const {
  RuleState state = start();
  for (auto b : history.bits()) state.advance(b != 0);
  return state;
}

namespace {

// Adapts whole-history functions to the cursor interface.
class HistoryCursor final : public RuleCursor {
 public:
  HistoryCursor(PositionFn f, PositionFn h, FlagFn g)
      : f_(std::move(f)), h_(std::move(h)), g_(std::move(g)) {}

  std::optional<std::size_t> next_position() const override { return f_(history_); }
  std::optional<std::size_t> threshold() const override {
    return h_ ? h_(history_) : std::nullopt;
  }
  std::optional<bool> select_flag() const override { return g_ ? g_(history_) : std::nullopt; }
  void advance(bool bit) override { history_.push_back(bit); }
  std::unique_ptr<RuleCursor> clone() const override {
    return std::make_unique<HistoryCursor>(*this);
  }

 private:
  PositionFn f_;
  PositionFn h_;
  FlagFn g_;
  BitString history_;
};

// F = |xi|; H = |xi| when pattern[|xi| mod p] = 1, else |xi| + 1.
class McMaskCursor final : public RuleCursor {
 public:
  explicit McMaskCursor(std::shared_ptr<const BitString> pattern) : pattern_(std::move(pattern)) {}

  std::optional<std::size_t> next_position() const override { return n_; }
  std::optional<std::size_t> threshold() const override {
    return (*pattern_)[n_ % pattern_->size()] ? n_ : n_ + 1;
  }
  void advance(bool) override { ++n_; }
  std::unique_ptr<RuleCursor> clone() const override {
    return std::make_unique<McMaskCursor>(*this);
  }

 private:
  std::shared_ptr<const BitString> pattern_;
  std::size_t n_ = 0;
};

// Examines 1, 0, 3, 2, 5, 4, ...; H = 2 * ceil(|xi| / 2), so odd positions
// are selected and even ones are examined without selection.
class PairSwapCursor final : public RuleCursor {
 public:
  std::optional<std::size_t> next_position() const override {
    return n_ % 2 == 0 ? n_ + 1 : n_ - 1;
  }
  std::optional<std::size_t> threshold() const override { return 2 * ((n_ + 1) / 2); }
  void advance(bool) override { ++n_; }
  std::unique_ptr<RuleCursor> clone() const override {
    return std::make_unique<PairSwapCursor>(*this);
  }

 private:
  std::size_t n_ = 0;
};

// Pointer p(lambda) = 0, p(xi b) = p(xi) + 1 + b; F = H = p. Every examined
// bit is selected; the bit after each examined 1 is skipped.
class SkipOnOneCursor final : public RuleCursor {
 public:
  std::optional<std::size_t> next_position() const override { return p_; }
  std::optional<std::size_t> threshold() const override { return p_; }
  void advance(bool bit) override { p_ += bit ? 2 : 1; }
  std::unique_ptr<RuleCursor> clone() const override {
    return std::make_unique<SkipOnOneCursor>(*this);
  }

 private:
  std::size_t p_ = 0;
};

// F = |xi|; H = c * (ones(xi) + 1).
class ThresholdOnesCursor final : public RuleCursor {
 public:
  explicit ThresholdOnesCursor(std::size_t c) : c_(c) {}

  std::optional<std::size_t> next_position() const override { return n_; }
  std::optional<std::size_t> threshold() const override { return c_ * (ones_ + 1); }
  void advance(bool bit) override {
    ++n_;
    if (bit) ++ones_;
  }
  std::unique_ptr<RuleCursor> clone() const override {
    return std::make_unique<ThresholdOnesCursor>(*this);
  }

 private:
  std::size_t c_;
  std::size_t n_ = 0;
  std::size_t ones_ = 0;
};

std::size_t parse_positive(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) {
    throw Error(std::string(what) + ": expected a positive integer, got '" + std::string(text) +
                "'");
  }
  return value;
}

}  // namespace

SelectionRule SelectionRule::bounded(std::string name, PositionFn next_position,
                                     PositionFn threshold) {
  if (!next_position || !threshold) throw Error("SelectionRule::bounded: missing F or H");
  return SelectionRule(RuleKind::bounded, std::move(name),
                       [f = std::move(next_position), h = std::move(threshold)] {
                         return std::make_unique<HistoryCursor>(f, h, nullptr);
                       });
}

SelectionRule SelectionRule::general(std::string name, PositionFn next_position,
                                     FlagFn select_flag) {
  if (!next_position || !select_flag) throw Error("SelectionRule::general: missing F or G");
  return SelectionRule(RuleKind::general, std::move(name),
                       [f = std::move(next_position), g = std::move(select_flag)] {
                         return std::make_unique<HistoryCursor>(f, nullptr, g);
                       });
}

RuleSpec RuleSpec::parse(std::string_view text) {
  auto colon = text.find(':');
  std::string_view family = text.substr(0, colon);
  std::optional<std::string_view> param;
  if (colon != std::string_view::npos) param = text.substr(colon + 1);

  RuleSpec spec;
  if (family == "mc-mask") {
    spec.family = RuleFamily::mc_mask;
    if (!param || param->empty()) throw Error("mc-mask needs a pattern, e.g. mc-mask:10110");
    spec.pattern = BitString::parse(*param);
    if (spec.pattern.empty()) throw Error("mc-mask pattern is empty");
  } else if (family == "pair-swap" || family == "skip-on-one") {
    spec.family = family == "pair-swap" ? RuleFamily::pair_swap : RuleFamily::skip_on_one;
    if (param) throw Error(std::string(family) + " takes no parameter");
  } else if (family == "threshold-ones") {
    spec.family = RuleFamily::threshold_ones;
    if (!param) throw Error("threshold-ones needs c, e.g. threshold-ones:3");
    spec.c = parse_positive(*param, "threshold-ones");
  } else {
    throw Error("unknown rule family '" + std::string(family) + "'");
  }
  return spec;
}

std::string RuleSpec::str() const {
  switch (family) {
    case RuleFamily::mc_mask:
      return "mc-mask:" + pattern.str();
    case RuleFamily::pair_swap:
      return "pair-swap";
    case RuleFamily::skip_on_one:
      return "skip-on-one";
    case RuleFamily::threshold_ones:
      return "threshold-ones:" + std::to_string(c);
  }
  return {};
}

std::vector<std::string> RuleSpec::warnings() const {
  std::vector<std::string> out;
  if (family == RuleFamily::mc_mask && pattern.ones() == 0) {
    out.push_back("mc-mask pattern has no 1: nothing is ever selected");
  }
  if (family == RuleFamily::threshold_ones) {
    out.push_back("threshold-ones: H is unbounded only on inputs with infinitely many ones");
  }
  return out;
}

SelectionRule build_from_spec(const RuleSpec& spec) {
  switch (spec.family) {
    case RuleFamily::mc_mask: {
      if (spec.pattern.empty()) throw Error("mc-mask pattern is empty");
      auto pattern = std::make_shared<const BitString>(spec.pattern);
      return SelectionRule(RuleKind::bounded, spec.str(),
                           [pattern] { return std::make_unique<McMaskCursor>(pattern); });
    }
    case RuleFamily::pair_swap:
      return SelectionRule(RuleKind::bounded, spec.str(),
                           [] { return std::make_unique<PairSwapCursor>(); });
    case RuleFamily::skip_on_one:
      return SelectionRule(RuleKind::bounded, spec.str(),
                           [] { return std::make_unique<SkipOnOneCursor>(); });
    case RuleFamily::threshold_ones: {
      if (spec.c == 0) throw Error("threshold-ones: c must be positive");
      std::size_t c = spec.c;
      return SelectionRule(RuleKind::bounded, spec.str(),
                           [c] { return std::make_unique<ThresholdOnesCursor>(c); });
    }
  }
  throw Error("unknown rule family");
}

ValidityReport validate_rule(const SelectionRule& rule, const std::vector<BitString>& inputs) {
  ValidityReport report;
  for (std::size_t index = 0; index < inputs.size(); ++index) {
    const BitString& input = inputs[index];
    RuleState state = rule.start();
    std::vector<std::uint8_t> seen(input.size(), 0);
    std::vector<std::size_t> thresholds;
    std::optional<std::size_t> previous_h;

    // At most |input| fresh positions exist, so the loop is bounded.
    for (std::size_t step = 0; step <= input.size(); ++step) {
      ++report.histories_checked;
      auto f = state.next_position();
      if (!f) break;
      if (rule.is_bounded()) {
        auto h = state.threshold();
        if (!h) break;
        if (previous_h && *h < *previous_h) {
          report.violations.push_back(
              {RuleViolation::Kind::threshold_decrease, index, step,
               "H dropped from " + std::to_string(*previous_h) + " to " + std::to_string(*h)});
        }
        previous_h = h;
        thresholds.push_back(*h);
        report.max_threshold = std::max(report.max_threshold, *h);
      }
      if (*f >= input.size()) break;
      if (seen[*f]) {
        report.violations.push_back({RuleViolation::Kind::position_repeat, index, step,
                                     "position " + std::to_string(*f) + " requested again"});
        break;
      }
      if (!state.select()) break;
      seen[*f] = 1;
      state.advance(input[*f]);
    }

    if (rule.is_bounded() && thresholds.size() >= 8 &&
        thresholds.back() == thresholds[thresholds.size() / 2]) {
      report.warnings.push_back("input " + std::to_string(index) + ": H plateaus at " +
                                std::to_string(thresholds.back()) + " over the second half of " +
                                std::to_string(thresholds.size()) + " stages");
    }
  }
  return report;
}

}  // namespace klsel

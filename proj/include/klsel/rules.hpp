#pragma once

// Kolmogorov-Loveland selection rules.
//
// A rule is evaluated on a history: the bits examined so far, in the order
// they were examined. F gives the next position to examine; a general rule
// also gives a select flag G, while a bounded rule gives a threshold H and
// selects exactly when F >= H. Rules may diverge on a history; divergence
// is an empty optional.
//
// Evaluating a rule from scratch on every history is quadratic over a run,
// so rules are expressed as cursors: a cursor holds whatever a rule needs to
// remember about the history so far and is advanced one bit at a time.
// SelectionRule::state_after() gives the history-function view.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "klsel/bitseq.hpp"

namespace klsel {

enum class RuleKind { bounded, general };

/// Rule state after some history.
class RuleCursor {
 public:
  virtual ~RuleCursor() = default;
  virtual std::optional<std::size_t> next_position() const = 0;
  // Bounded rules only.
  virtual std::optional<std::size_t> threshold() const { return std::nullopt; }
  // General rules only.
  virtual std::optional<bool> select_flag() const { return std::nullopt; }
  virtual void advance(bool bit) = 0;
  virtual std::unique_ptr<RuleCursor> clone() const = 0;
};

/// Value wrapper around a cursor. For bounded rules select() is computed from
/// F and H and never stored.
class RuleState {
 public:
  RuleState(RuleKind kind, std::unique_ptr<RuleCursor> cursor)
      : kind_(kind), cursor_(std::move(cursor)) {}
  RuleState(const RuleState& other)
      : kind_(other.kind_), cursor_(other.cursor_->clone()), length_(other.length_) {}
  RuleState& operator=(const RuleState& other) {
    if (this != &other) {
      kind_ = other.kind_;
      cursor_ = other.cursor_->clone();
      length_ = other.length_;
    }
    return *this;
  }
  RuleState(RuleState&&) noexcept = default;
  RuleState& operator=(RuleState&&) noexcept = default;

  RuleKind kind() const { return kind_; }
  std::size_t history_length() const { return length_; }

  std::optional<std::size_t> next_position() const { return cursor_->next_position(); }
  std::optional<std::size_t> threshold() const { return cursor_->threshold(); }
  std::optional<bool> select() const;

  void advance(bool bit) {
    cursor_->advance(bit);
    ++length_;
  }

 private:
  RuleKind kind_;
  std::unique_ptr<RuleCursor> cursor_;
  std::size_t length_ = 0;
};

using PositionFn = std::function<std::optional<std::size_t>(const BitString&)>;
using FlagFn = std::function<std::optional<bool>(const BitString&)>;

/// An immutable strategy value; copies share the cursor factory.
class SelectionRule {
 public:
  using Factory = std::function<std::unique_ptr<RuleCursor>()>;

  SelectionRule(RuleKind kind, std::string name, Factory factory);

  // Rules given directly as functions of the whole history. Each evaluation
  // sees the full history, so these cost O(|history|) per step; fine for
  // tests and small experiments.
  static SelectionRule bounded(std::string name, PositionFn next_position, PositionFn threshold);
  static SelectionRule general(std::string name, PositionFn next_position, FlagFn select_flag);

  RuleKind kind() const { return kind_; }
  bool is_bounded() const { return kind_ == RuleKind::bounded; }
  const std::string& name() const { return name_; }

  RuleState start() const { return RuleState(kind_, factory_()); }
  RuleState state_after(const BitString& history) const;

  // F(xi), H(xi), G(xi).
  std::optional<std::size_t> next_position(const BitString& history) const {
    return state_after(history).next_position();
  }
  std::optional<std::size_t> threshold(const BitString& history) const {
    return state_after(history).threshold();
  }
  std::optional<bool> select_flag(const BitString& history) const {
    return state_after(history).select();
  }

 private:
  RuleKind kind_;
  std::string name_;
  Factory factory_;
};

enum class RuleFamily { mc_mask, pair_swap, skip_on_one, threshold_ones };

/// A built-in rule family plus its parameters, as written on the command
/// line: "mc-mask:10110", "pair-swap", "skip-on-one", "threshold-ones:3".
struct RuleSpec {
  RuleFamily family = RuleFamily::pair_swap;
  BitString pattern;  // mc-mask
  std::size_t c = 1;  // threshold-ones

  static RuleSpec parse(std::string_view text);
  std::string str() const;
  // Non-fatal problems, e.g. an mc-mask pattern that never selects.
  std::vector<std::string> warnings() const;
};

SelectionRule build_from_spec(const RuleSpec& spec);
inline SelectionRule build_from_spec(std::string_view text) {
  return build_from_spec(RuleSpec::parse(text));
}

struct RuleViolation {
  enum class Kind { threshold_decrease, position_repeat };
  Kind kind;
  std::size_t input_index;
  std::size_t step;
  std::string detail;
};

struct ValidityReport {
  std::vector<RuleViolation> violations;
  // Heuristic evidence only: a finite trace cannot prove H unbounded.
  std::vector<std::string> warnings;
  std::size_t max_threshold = 0;
  std::size_t histories_checked = 0;

  bool ok() const { return violations.empty(); }
};

/// Traces the rule over each input and reports decreasing thresholds,
/// repeated positions, and thresholds that plateau over the second half of a
/// trace.
ValidityReport validate_rule(const SelectionRule& rule, const std::vector<BitString>& inputs);

}  // namespace klsel

#pragma once

// Runs a place selection over a finite input prefix and records the whole
// trace.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "klsel/bitseq.hpp"
#include "klsel/rules.hpp"

namespace klsel {

enum class StopReason { input_exhausted, position_repeat, rule_divergence, step_limit };

std::string_view to_string(StopReason reason);
StopReason stop_reason_from_string(std::string_view text);

struct SelectionTrace {
  RuleKind kind = RuleKind::bounded;
  BitString xi;                        // examined values, in examination order
  BitString rho;                       // selection flags
  std::vector<std::size_t> positions;  // F value of each step
  // H(xi_k) for every stage k at which H converged, including the final
  // (non-examining) stage. Bounded rules only.
  std::vector<std::size_t> thresholds;
  BitString mask_b;  // over the input span: 1 iff the position was selected
  BitString q_star;
  BitString n_prefix;  // bounded rules only
  std::size_t h_final = 0;
  StopReason stop_reason = StopReason::input_exhausted;
  // Stages k with F(xi_k) >= H(xi_k).
  std::vector<std::size_t> checkpoint_stages;

  std::size_t steps() const { return positions.size(); }
};

/// Enough steps for any rule that never repeats a position.
inline std::size_t default_max_steps(const BitString& input) { return input.size() + 1; }

/// Follows the selection process on `input`. Stops at the first request for a
/// position outside the input, a repeated position, a divergent rule
/// function, or after max_steps steps.
SelectionTrace run(const SelectionRule& rule, const BitString& input, std::size_t max_steps);
inline SelectionTrace run(const SelectionRule& rule, const BitString& input) {
  return run(rule, input, default_max_steps(input));
}

struct Checkpoint {
  std::size_t stage;
  std::size_t h;
  BitString sigma;  // nonselected bits of input[0..h-1]
  BitString tau;    // selected bits among the first `stage` examined
};

/// The pair (sigma, tau) determined at checkpoint stage k. Throws when k is
/// not a checkpoint stage or its window H(xi_k) runs past the input.
Checkpoint checkpoint(const SelectionTrace& trace, std::size_t k, const BitString& input);

/// Checkpoints whose window lies inside the input, in stage order.
std::vector<Checkpoint> resolved_checkpoints(const SelectionTrace& trace, const BitString& input);

/// Fields that appear in the JSON trace schema.
bool same_public_fields(const SelectionTrace& a, const SelectionTrace& b);

/// Re-runs the rule with the default step budget and compares.
bool replay_verify(const SelectionTrace& trace, const SelectionRule& rule, const BitString& input);

/// {positions, xi, rho, q_star, n_prefix, h_final, stop_reason, checkpoints},
/// in that key order.
nlohmann::ordered_json to_json(const SelectionTrace& trace);
/// Inverse of to_json for the public fields.
SelectionTrace trace_from_json(const nlohmann::json& j);

}  // namespace klsel

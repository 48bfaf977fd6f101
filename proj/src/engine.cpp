#include "klsel/engine.hpp"

#include <algorithm>

#include "klsel/error.hpp"

namespace klsel {

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::input_exhausted:
      return "input-exhausted";
    case StopReason::position_repeat:
      return "position-repeat";
    case StopReason::rule_divergence:
      return "rule-divergence";
    case StopReason::step_limit:
      return "step-limit";
  }
  return "unknown";
}

StopReason stop_reason_from_string(std::string_view text) {
  for (auto r : {StopReason::input_exhausted, StopReason::position_repeat,
                 StopReason::rule_divergence, StopReason::step_limit}) {
    if (to_string(r) == text) return r;
  }
  throw Error("unknown stop reason '" + std::string(text) + "'");
}

SelectionTrace run(const SelectionRule& rule, const BitString& input, std::size_t max_steps) {
  const std::size_t n = input.size();
  const bool bounded = rule.is_bounded();

  SelectionTrace trace;
  trace.kind = rule.kind();
  trace.mask_b = BitString(n, false);

  RuleState state = rule.start();
  std::vector<std::uint8_t> seen(n, 0);
  for (;;) {
    const std::size_t k = trace.steps();
    auto f = state.next_position();
    std::optional<std::size_t> h;
    if (bounded) h = state.threshold();
    if (!f || (bounded && !h)) {
      trace.stop_reason = StopReason::rule_divergence;
      break;
    }
    if (bounded) {
      trace.thresholds.push_back(*h);
      if (*f >= *h) trace.checkpoint_stages.push_back(k);
    }
    if (*f >= n) {
      trace.stop_reason = StopReason::input_exhausted;
      break;
    }
    if (seen[*f]) {
      trace.stop_reason = StopReason::position_repeat;
      break;
    }
    if (k >= max_steps) {
      trace.stop_reason = StopReason::step_limit;
      break;
    }
    auto g = state.select();
    if (!g) {
      trace.stop_reason = StopReason::rule_divergence;
      break;
    }

    const bool bit = input[*f];
    seen[*f] = 1;
    trace.positions.push_back(*f);
    trace.xi.push_back(bit);
    trace.rho.push_back(*g);
    if (*g) {
      trace.q_star.push_back(bit);
      trace.mask_b.set(*f, true);
    }
    state.advance(bit);
  }

  if (bounded) {
    trace.h_final = trace.thresholds.empty() ? 0 : std::min(trace.thresholds.back(), n);
    for (std::size_t z = 0; z < trace.h_final; ++z) {
      if (!trace.mask_b[z]) trace.n_prefix.push_back(input[z]);
    }
  }
  return trace;
}

Checkpoint checkpoint(const SelectionTrace& trace, std::size_t k, const BitString& input) {
  if (!std::binary_search(trace.checkpoint_stages.begin(), trace.checkpoint_stages.end(), k)) {
    throw Error("checkpoint: stage " + std::to_string(k) + " is not a checkpoint stage");
  }
  const std::size_t h = trace.thresholds.at(k);
  if (h > input.size()) {
    throw Error("checkpoint: window H = " + std::to_string(h) + " at stage " +
                std::to_string(k) + " exceeds the input length " +
                std::to_string(input.size()));
  }
  Checkpoint cp{k, h, {}, {}};
  BitString selected_below(h, false);
  for (std::size_t j = 0; j < k; ++j) {
    if (trace.rho[j]) {
      cp.tau.push_back(trace.xi[j]);
      if (trace.positions[j] < h) selected_below.set(trace.positions[j], true);
    }
  }
  for (std::size_t z = 0; z < h; ++z) {
    if (!selected_below[z]) cp.sigma.push_back(input[z]);
  }
  return cp;
}

std::vector<Checkpoint> resolved_checkpoints(const SelectionTrace& trace, const BitString& input) {
  std::vector<Checkpoint> out;
  for (auto k : trace.checkpoint_stages) {
    if (trace.thresholds[k] <= input.size()) out.push_back(checkpoint(trace, k, input));
  }
  return out;
}

bool same_public_fields(const SelectionTrace& a, const SelectionTrace& b) {
  return a.positions == b.positions && a.xi == b.xi && a.rho == b.rho && a.q_star == b.q_star &&
         a.n_prefix == b.n_prefix && a.h_final == b.h_final && a.stop_reason == b.stop_reason &&
         a.checkpoint_stages == b.checkpoint_stages;
}

bool replay_verify(const SelectionTrace& trace, const SelectionRule& rule, const BitString& input) {
  return same_public_fields(trace, run(rule, input));
}

nlohmann::ordered_json to_json(const SelectionTrace& trace) {
  nlohmann::ordered_json j;
  j["positions"] = trace.positions;
  j["xi"] = trace.xi.str();
  j["rho"] = trace.rho.str();
  j["q_star"] = trace.q_star.str();
  j["n_prefix"] = trace.n_prefix.str();
  j["h_final"] = trace.h_final;
  j["stop_reason"] = std::string(to_string(trace.stop_reason));
  j["checkpoints"] = trace.checkpoint_stages;
  return j;
}

SelectionTrace trace_from_json(const nlohmann::json& j) {
  try {
    SelectionTrace trace;
    trace.positions = j.at("positions").get<std::vector<std::size_t>>();
    trace.xi = BitString::parse(j.at("xi").get<std::string>());
    trace.rho = BitString::parse(j.at("rho").get<std::string>());
    trace.q_star = BitString::parse(j.at("q_star").get<std::string>());
    trace.n_prefix = BitString::parse(j.at("n_prefix").get<std::string>());
    trace.h_final = j.at("h_final").get<std::size_t>();
    trace.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
    trace.checkpoint_stages = j.at("checkpoints").get<std::vector<std::size_t>>();
    return trace;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed trace JSON: ") + e.what());
  }
}

}  // namespace klsel

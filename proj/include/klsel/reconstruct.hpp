#pragma once

// Reconstruction of a partial initial segment of the input from a prefix
// sigma of the nonselected bits and a prefix tau of the selected bits, for
// bounded rules.
//
// The construction simulates F and H. alpha starts undefined everywhere and
// xi-hat empty. At each stage, with h = H(xi-hat) and u the number of
// undefined positions of alpha below h:
//   * |sigma| < u                 -> diverge (sigma-short)
//   * alpha* = alpha <- sigma[0..u-1]
//   * |sigma| = u and |tau| = t   -> converge to alpha*
//   * F(xi-hat) < h               -> extend xi-hat with alpha*[F]
//   * F(xi-hat) >= h              -> write tau[t] at F, extend xi-hat with it,
//                                    t += 1; diverge (tau-exhausted) if none left
// Inputs are read strictly left to right.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "klsel/bitseq.hpp"
#include "klsel/rules.hpp"

namespace klsel {

enum class Divergence { sigma_short, tau_exhausted, rule_divergence, stage_limit };

std::string_view to_string(Divergence d);

struct ReconstructionOutcome {
  std::optional<PartialString> result;
  std::optional<Divergence> divergence;
  std::size_t stages_used = 0;

  bool converged() const { return result.has_value(); }
  // "converged" or the divergence tag.
  std::string tag() const;
};

/// 4 * (|sigma| + |tau|) + 8. A rule that never revisits a position needs at
/// most |sigma| + |tau| + 1 stages.
std::size_t default_stage_limit(std::size_t sigma_len, std::size_t tau_len);

/// S(sigma, tau). Throws klsel::Error for a general (non-bounded) rule.
/// A rule that asks for an already examined position makes the construction
/// diverge with rule-divergence.
ReconstructionOutcome reconstruct(const SelectionRule& rule, const BitString& sigma,
                                  const BitString& tau,
                                  std::optional<std::size_t> max_stages = std::nullopt);

/// Every proper extension tau' of tau with |tau'| <= |tau| + extra for which
/// S(sigma, tau') converges, found by one depth-first walk that shares the
/// construction across common prefixes of tau'.
std::vector<BitString> converging_extensions(const SelectionRule& rule, const BitString& sigma,
                                             const BitString& tau, std::size_t extra);

struct ClaimCheck {
  std::size_t checked = 0;
  std::size_t failed = 0;
};

struct ClaimReport {
  ClaimCheck monotone;      // (i)   sigma' <= sigma, tau' <= tau  =>  alpha' <= alpha
  ClaimCheck no_extension;  // (ii)  shorter sigma never converges with a longer tau
  ClaimCheck measure;       // (iii) defined bits = |sigma| + |tau|
  ClaimCheck soundness;     // (iv)  checkpoint reconstructions are prefixes of the input
  ClaimCheck convergence;   // (v)   every checkpoint pair converges
  std::size_t checkpoints = 0;
  std::vector<std::string> failures;  // first few, for diagnostics

  bool ok() const {
    return monotone.failed + no_extension.failed + measure.failed + soundness.failed +
               convergence.failed ==
           0;
  }
  void merge(const ClaimReport& other);
};

/// Bound on |tau'| - |tau| in the no-extension search.
inline constexpr std::size_t kExtensionSearchDepth = 8;

/// Runs the rule on `input`, reconstructs at every resolved checkpoint, and
/// checks the five reconstruction properties. Checkpoint-based checks are
/// exhaustive; `trials` additional sampled (checkpoint, shorter prefix) pairs
/// exercise (i) off the checkpoints and drive the bounded search for (ii).
ClaimReport verify_claim1(const SelectionRule& rule, const BitString& input, std::size_t trials,
                          std::uint64_t seed = 0);

/// Memo of S(sigma, tau) for all |sigma| <= sigma_bound, |tau| <= tau_bound.
/// S depends on the rule only, so cover constructions for many enumerators
/// share one table.
class ReconstructionTable {
 public:
  ReconstructionTable(const SelectionRule& rule, std::size_t tau_bound, std::size_t sigma_bound);

  std::size_t tau_bound() const { return tau_bound_; }
  std::size_t sigma_bound() const { return sigma_bound_; }
  const std::string& rule_name() const { return rule_name_; }

  // Empty when S(sigma, tau) diverges. Both lengths must be within bounds.
  const std::optional<PartialString>& at(const BitString& sigma, const BitString& tau) const;

 private:
  std::size_t tau_bound_;
  std::size_t sigma_bound_;
  std::string rule_name_;
  std::vector<std::optional<PartialString>> entries_;
};

}  // namespace klsel

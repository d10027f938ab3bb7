#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nsed/core_types.hpp"

namespace nsed::consensus {

inline constexpr double kDefaultScoreTolerance = 0.05;
inline constexpr double kDefaultEpsilon = 0.02;
inline constexpr double kRetentionThreshold = 0.5;

struct RoundOutcome {
  int round = 0;
  Proposal winner;
  double winner_score = 0.0;
  double qv_confidence = 0.0;
  double delta_magnitude = 0.0;
  double gamma_t = 0.0;

  friend bool operator==(const RoundOutcome&, const RoundOutcome&) = default;
};

/// Commits the round: the winner becomes the consensus, the previous
/// consensus is retained verbatim when gamma_t >= kRetentionThreshold
/// ("refinement") or demoted to a compressed summary otherwise
/// ("pivoting"). Rounds older than the active window are summarized.
DeliberationState commit_state(const DeliberationState& previous, const RoundEntry& round, double gamma_t);

/// Scalar halting signal:
///   0                         if the winner is unchanged and |score change| < tolerance
///   |new - old|               if the winner is unchanged
///   new_score                 if the winner changed
double convergence_delta(double winner_score, double prev_winner_score, bool winner_changed,
                         double tolerance = kDefaultScoreTolerance);

enum class HaltReason { None, Converged, FatigueLimit, BudgetExhausted };

const char* to_string(HaltReason reason);
HaltReason halt_reason_from_string(const std::string& name);

struct HaltDecision {
  bool halt = false;
  HaltReason reason = HaltReason::None;
};

HaltDecision should_halt(double delta, double epsilon, double gamma_t, int t, int t_max);

/// Kernel weight for a proposal from round t when the history ends at last_round.
double kernel_weight(const TemporalKernel& kernel, int t, int last_round);

struct Selection {
  Proposal proposal;
  double score = 0.0;
  double weighted = 0.0;
};

/// argmax over every proposal p in history of score(p) * omega(t_p). Ties go
/// to the later round, then to the lower AgentId.
Selection select_consensus(const std::vector<RoundEntry>& history, const TemporalKernel& kernel);

}  // namespace nsed::consensus

#include "nsed/consensus.hpp"

#include <cmath>

namespace nsed {

class StateMutator {
 public:
  static void commit(DeliberationState& state, const RoundEntry& round, double gamma_t) {
    const Proposal& winner = round.proposals.at(round.winner);
    const double winner_score = round.scores.at(round.winner);

    if (state.consensus_) {
      if (gamma_t >= consensus::kRetentionThreshold) {
        state.retained_ = state.consensus_;
      } else {
        state.summaries_.push_back({state.consensus_->round, state.consensus_->blinded_id, state.consensus_score_,
                                    digest_of(*state.consensus_)});
        state.retained_.reset();
      }
    }
    state.consensus_ = winner;
    state.consensus_score_ = winner_score;
    state.history_.push_back(round);

    // Rounds that just left the active window get a summary record.
    const int cutoff = round.round - state.active_window_;
    for (const auto& entry : state.history_) {
      if (entry.round >= cutoff) continue;
      bool summarized = false;
      for (const auto& s : state.summaries_) {
        if (s.round == entry.round && s.winner_blinded_id == entry.proposals.at(entry.winner).blinded_id) {
          summarized = true;
          break;
        }
      }
      if (!summarized) {
        const Proposal& w = entry.proposals.at(entry.winner);
        state.summaries_.push_back({entry.round, w.blinded_id, entry.scores.at(entry.winner), digest_of(w)});
      }
    }
    if (state.retained_ && state.retained_->round < cutoff) state.retained_.reset();
  }
};

namespace consensus {

DeliberationState commit_state(const DeliberationState& previous, const RoundEntry& round, double gamma_t) {
  if (!(gamma_t >= 0.0 && gamma_t <= 1.0)) throw Error(ErrorCode::GammaOutOfRange, "gamma_t must lie in [0,1]");
  if (round.proposals.empty() || round.winner >= round.proposals.size() ||
      round.scores.size() != round.proposals.size()) {
    throw Error(ErrorCode::PreconditionViolated, "round entry has no valid winner");
  }
  DeliberationState next = previous;
  StateMutator::commit(next, round, gamma_t);
  return next;
}

double convergence_delta(double winner_score, double prev_winner_score, bool winner_changed, double tolerance) {
  if (winner_changed) return std::abs(winner_score);
  const double change = std::abs(winner_score - prev_winner_score);
  return change < tolerance ? 0.0 : change;
}

const char* to_string(HaltReason reason) {
  switch (reason) {
    case HaltReason::None: return "None";
    case HaltReason::Converged: return "Converged";
    case HaltReason::FatigueLimit: return "FatigueLimit";
    case HaltReason::BudgetExhausted: return "BudgetExhausted";
  }
  return "None";
}

HaltReason halt_reason_from_string(const std::string& name) {
  if (name == "Converged") return HaltReason::Converged;
  if (name == "FatigueLimit") return HaltReason::FatigueLimit;
  if (name == "BudgetExhausted") return HaltReason::BudgetExhausted;
  return HaltReason::None;
}

HaltDecision should_halt(double delta, double epsilon, double gamma_t, int t, int t_max) {
  if (delta < epsilon) return {true, HaltReason::Converged};
  if (gamma_t <= 0.0) return {true, HaltReason::FatigueLimit};
  if (t >= t_max) return {true, HaltReason::BudgetExhausted};
  return {};
}

double kernel_weight(const TemporalKernel& kernel, int t, int last_round) {
  switch (kernel.kind) {
    case KernelKind::dictator: return t == last_round ? 1.0 : 0.0;
    case KernelKind::history_max: return 1.0;
    case KernelKind::linear: return 1.0 + kernel.parameter * t;
    case KernelKind::exponential: return std::pow(kernel.parameter, t);
  }
  return 1.0;
}

Selection select_consensus(const std::vector<RoundEntry>& history, const TemporalKernel& kernel) {
  if (history.empty()) throw Error(ErrorCode::EmptyHistory, "no rounds to select from");
  int last_round = 0;
  for (const auto& entry : history) last_round = std::max(last_round, entry.round);

  const Proposal* best = nullptr;
  double best_weighted = 0.0;
  double best_score = 0.0;
  for (const auto& entry : history) {
    const double w = kernel_weight(kernel, entry.round, last_round);
    for (std::size_t i = 0; i < entry.proposals.size(); ++i) {
      const Proposal& p = entry.proposals[i];
      if (kernel.kind == KernelKind::dictator && entry.round != last_round) continue;
      const double weighted = entry.scores.at(i) * w;
      bool better = best == nullptr || weighted > best_weighted;
      if (!better && weighted == best_weighted) {
        better = p.round > best->round || (p.round == best->round && p.author < best->author);
      }
      if (better) {
        best = &p;
        best_weighted = weighted;
        best_score = entry.scores.at(i);
      }
    }
  }
  if (best == nullptr) throw Error(ErrorCode::EmptyHistory, "history holds no proposals");
  return {*best, best_score, best_weighted};
}

}  // namespace consensus
}  // namespace nsed

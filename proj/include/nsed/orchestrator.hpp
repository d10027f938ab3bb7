#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsed/agents.hpp"
#include "nsed/consensus.hpp"
#include "nsed/core_types.hpp"

namespace nsed::broker {
struct TaskProfile;
}

namespace nsed::orchestrator {

/// Candidates in presentation order plus the secret map back to authors.
struct AnonymizedSet {
  std::vector<agents::CandidateView> candidates;
  std::vector<std::size_t> author_index;  // candidates[k] came from input[author_index[k]]
};

/// Seeded Fisher-Yates shuffle with fresh random blinded tokens. Tokens are
/// derived from the seed and the output position only.
AnonymizedSet anonymize(const std::vector<Proposal>& candidates, std::uint64_t seed);

/// Index of the reserve closest in capability to `stalled`
/// (|dp_v| + |dp_g|, ties to the lower AgentId). Throws NoReserves.
std::size_t hot_swap(const AgentProfile& stalled, const std::vector<AgentProfile>& reserves);

class ReservePool {
 public:
  ReservePool() = default;
  explicit ReservePool(std::vector<std::unique_ptr<agents::Agent>> agents) : agents_(std::move(agents)) {}

  void add(std::unique_ptr<agents::Agent> agent) { agents_.push_back(std::move(agent)); }
  bool empty() const { return agents_.empty(); }
  std::size_t size() const { return agents_.size(); }
  std::vector<AgentProfile> profiles() const;

  /// Removes and returns the reserve chosen by hot_swap.
  std::unique_ptr<agents::Agent> take_for(const AgentProfile& stalled);

 private:
  std::vector<std::unique_ptr<agents::Agent>> agents_;
};

/// Packet for one slot. `critiques` are the critiques its last proposal
/// received; `previous_votes` is the last round's normalized masked matrix
/// with blinded labels.
agents::ContextPacket build_context(const DeliberationState& state, int round,
                                    const std::vector<std::string>& critiques,
                                    const std::optional<VoteMatrix>& previous_votes);

enum class EventKind {
  round_started,
  constraint_added,
  generate_requested,
  proposal_received,
  evaluate_requested,
  evaluation_received,
  agent_stalled,
  hot_swapped,
  agent_dropped,
  round_committed,
  halted,
};

const char* to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& name);

struct Event {
  int round = 0;
  EventKind kind = EventKind::round_started;
  std::string agent;
  std::string detail;

  friend bool operator==(const Event&, const Event&) = default;
};

struct AgentTiming {
  AgentId agent;
  double gen_s = 0.0;
  double eval_s = 0.0;  // sum over the candidates this agent scored

  friend bool operator==(const AgentTiming&, const AgentTiming&) = default;
};

struct SwapEvent {
  int round = 0;
  std::string phase;  // "generate" or "evaluate"
  AgentId stalled;
  AgentId replacement;

  friend bool operator==(const SwapEvent&, const SwapEvent&) = default;
};

struct SessionRecord {
  SessionManifest manifest;
  std::vector<std::string> input_buffer;
  std::vector<consensus::RoundOutcome> rounds;
  std::vector<RoundEntry> history;               // proposals in presentation order
  std::vector<std::vector<AgentTiming>> timings;  // per round, per participating slot
  Proposal final_answer;
  double final_score = 0.0;
  consensus::HaltReason halt_reason = consensus::HaltReason::None;
  std::vector<SwapEvent> swaps;
  std::vector<Event> events;

  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

struct RunOptions {
  double agent_timeout_s = 60.0;
  std::optional<double> max_latency_s;  // session SLA; Timeout when exceeded
  double overhead_s = 0.0;              // added to each round for the SLA check
  bool parallel = true;
  /// Polled before each round; returned constraints join the input buffer.
  std::function<std::vector<std::string>(int round)> constraint_source;
};

/// Runs the deliberation loop over a fixed team (one agent per manifest
/// slot, same order). Throws AgentFailure when a round has no surviving
/// agent and Timeout when the session exceeds `max_latency_s`.
SessionRecord run_deliberation(const std::string& task, const SessionManifest& manifest,
                               std::vector<std::unique_ptr<agents::Agent>>& team, ReservePool& reserves,
                               const RunOptions& options = {});

SessionRecord run_deliberation(const broker::TaskProfile& task, const SessionManifest& manifest,
                               std::vector<std::unique_ptr<agents::Agent>>& team, ReservePool& reserves,
                               const RunOptions& options = {});

}  // namespace nsed::orchestrator

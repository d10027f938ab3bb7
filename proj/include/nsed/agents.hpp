#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nsed/core_types.hpp"

namespace nsed::agents {

/// What a candidate looks like to an agent: a per-round blinded token and
/// the text, never the author.
struct CandidateView {
  std::string blinded_id;
  std::string reasoning;
  std::string answer;

  friend bool operator==(const CandidateView&, const CandidateView&) = default;
};

struct RecentWinner {
  int round = 0;
  CandidateView candidate;
  double score = 0.0;

  friend bool operator==(const RecentWinner&, const RecentWinner&) = default;
};

/// Everything an agent sees for round t: [x_t ; S_{t-1}] plus its own
/// critiques and the previous round's blinded vote matrix.
struct ContextPacket {
  int round = 1;
  std::vector<std::string> input_buffer;
  std::optional<CandidateView> consensus;
  double consensus_score = 0.0;
  std::optional<CandidateView> retained;
  std::vector<RecentWinner> recent_winners;   // active window, full text
  std::vector<HistorySummary> summaries;      // older rounds, compressed
  std::vector<std::string> critiques;         // received on own last proposal
  std::optional<VoteMatrix> previous_votes;   // labels are blinded tokens
  std::vector<double> controversy;            // per column of previous_votes

  friend bool operator==(const ContextPacket&, const ContextPacket&) = default;
};

/// Plain-text rendering of a packet for prompt-based backends.
std::string render_context(const ContextPacket& packet);

struct GenerationReply {
  std::string reasoning;
  std::string answer;
  double elapsed_s = 0.0;
  bool heuristic = false;  // recovered from text rather than a native tool call
};

struct EvaluationReply {
  double score = 0.0;  // raw, [0,100]
  std::string critique;
  double elapsed_s = 0.0;
  bool clamped = false;
  bool heuristic = false;
};

/// A bound expert. Implementations own their RNG stream or connection and
/// hold no state shared with other agents.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual const AgentProfile& profile() const = 0;
  virtual GenerationReply generate(const ContextPacket& context) = 0;
  virtual EvaluationReply evaluate(const CandidateView& candidate, const ContextPacket& context) = 0;
};

inline constexpr const char* kCorrectAnswer = "CORRECT";

struct SimParams {
  double p_g = 0.5;
  double p_v = 0.5;
  double fp_rate = 0.5;
  double adopt_rate = 0.9;
  double adopt_threshold = 0.6;
  double fatigue_kappa = 0.0;
  double repulsion = 0.15;  // alpha_sim
  double latency_mean_s = 1.0;
  double latency_jitter_s = 0.0;
  int wrong_answers = 8;
  std::uint64_t seed = 0;

  friend bool operator==(const SimParams&, const SimParams&) = default;
};

void validate_sim_params(const SimParams& params);

struct RemoteParams {
  std::string endpoint;  // base URL, e.g. http://127.0.0.1:8000/v1
  std::string model;
  std::string persona;
  double temperature = 0.6;
  double presence_penalty = 1.5;
  int max_tokens = 16000;
  double timeout_s = 60.0;
  std::string api_key_env = "NSED_API_KEY";

  friend bool operator==(const RemoteParams&, const RemoteParams&) = default;
};

struct AgentBinding {
  AgentProfile profile;
  std::variant<SimParams, RemoteParams> backend;

  friend bool operator==(const AgentBinding&, const AgentBinding&) = default;
};

/// Symbolic stochastic expert. Proposals are either kCorrectAnswer or one of
/// `wrong_answers` wrong tokens; scoring separates them with the configured
/// true/false positive rates and fatigue noise that grows as kappa * t^2.
class SimulatedAgent : public Agent {
 public:
  SimulatedAgent(AgentProfile profile, SimParams params);

  const AgentProfile& profile() const override { return profile_; }
  const SimParams& params() const { return params_; }
  GenerationReply generate(const ContextPacket& context) override;
  EvaluationReply evaluate(const CandidateView& candidate, const ContextPacket& context) override;

 private:
  std::string fresh_answer();
  double uniform();
  double latency();

  AgentProfile profile_;
  SimParams params_;
  std::mt19937_64 rng_;
  std::mt19937_64 latency_rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
};

struct ToolInvocation;

/// OpenAI-compatible chat-completions client. Each call opens its own
/// connection, so instances are safe to call from one worker at a time.
class RemoteAgent : public Agent {
 public:
  RemoteAgent(AgentProfile profile, RemoteParams params);

  const AgentProfile& profile() const override { return profile_; }
  const RemoteParams& params() const { return params_; }
  GenerationReply generate(const ContextPacket& context) override;
  EvaluationReply evaluate(const CandidateView& candidate, const ContextPacket& context) override;

  const std::string& scratchpad() const { return scratchpad_; }

 private:
  nlohmann::json complete(const std::string& instruction, const std::string& tool_name) const;
  void absorb_side_calls(const std::vector<ToolInvocation>& calls);

  AgentProfile profile_;
  RemoteParams params_;
  std::string scratchpad_;
};

/// Builds the concrete agent for a binding. `seed_salt` is mixed into
/// simulated seeds so replications draw independent streams.
std::unique_ptr<Agent> make_agent(const AgentBinding& binding, std::uint64_t seed_salt = 0);

/// SplitMix64 mixing step; used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace nsed::agents

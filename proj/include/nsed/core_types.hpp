#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsed/errors.hpp"

namespace nsed {

struct AgentId {
  std::string value;

  friend auto operator<=>(const AgentId&, const AgentId&) = default;
};

struct AgentProfile {
  AgentId id;
  std::set<std::string> domain_tags;
  double price_per_token = 0.0;
  double mean_latency_s = 1.0;
  double quality_prior = 0.5;
  double gen_precision = 0.5;  // p_g
  double ver_precision = 0.5;  // p_v
  double halluc_rate = 0.0;

  friend bool operator==(const AgentProfile&, const AgentProfile&) = default;
};

/// Throws ErrorCode::OutOfRange naming the first violated field.
void validate_profile(const AgentProfile& profile);

struct Sla {
  double max_latency_s = 0.0;
  double max_cost = 0.0;
  double min_quality = 0.0;
  double elasticity = 0.0;  // lambda in E = Utility - lambda * Cost

  friend bool operator==(const Sla&, const Sla&) = default;
};

struct Proposal {
  int round = 0;
  AgentId author;
  std::string blinded_id;
  std::string reasoning;
  std::string answer;

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

/// N x N peer scores. Row j is the evaluator, column i the proposer.
/// `labels` names the slot behind each index (agent ids in the orchestrator's
/// record, blinded tokens in anything shown to agents).
struct VoteMatrix {
  int round = 0;
  std::size_t size = 0;
  std::vector<double> entries;  // row-major, size * size
  std::vector<std::string> labels;

  VoteMatrix() = default;
  VoteMatrix(int round_, std::size_t n) : round(round_), size(n), entries(n * n, 0.0) {}

  double& at(std::size_t evaluator, std::size_t proposer) { return entries[evaluator * size + proposer]; }
  double at(std::size_t evaluator, std::size_t proposer) const { return entries[evaluator * size + proposer]; }

  friend bool operator==(const VoteMatrix&, const VoteMatrix&) = default;
};

enum class KernelKind { dictator, history_max, linear, exponential };

/// Temporal weighting kernel for final answer selection. `parameter` is
/// alpha for linear and gamma_w for exponential; unused otherwise.
struct TemporalKernel {
  KernelKind kind = KernelKind::history_max;
  double parameter = 0.0;

  friend bool operator==(const TemporalKernel&, const TemporalKernel&) = default;
};

const char* to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

struct ThermoParams {
  double p_g = 0.0;
  double p_v = 0.0;
  double efficiency = 1.0;  // Lambda
  double fatigue = 0.0;     // beta
  double r_squared = 0.0;
  double r_squared_excl_first = 0.0;
  int t_opt = 1;

  friend bool operator==(const ThermoParams&, const ThermoParams&) = default;
};

struct SessionManifest {
  std::string session_id;
  std::vector<AgentId> agents;
  int t_opt = 1;
  double gamma_base = 0.8;
  double epsilon = 0.02;
  TemporalKernel consensus_strategy;
  int vote_budget = 100;
  std::uint64_t seed = 0;

  friend bool operator==(const SessionManifest&, const SessionManifest&) = default;
};

struct ManifestIssue {
  ErrorCode code;
  std::string message;
};

/// All violated manifest invariants; empty when the manifest is valid.
std::vector<ManifestIssue> manifest_issues(const SessionManifest& manifest);

/// Returns the manifest unchanged, or throws Error(InvalidManifest) listing
/// every issue.
const SessionManifest& validate_manifest(const SessionManifest& manifest);

/// One score record per round per candidate, kept in the full archive.
struct RoundEntry {
  int round = 0;
  std::vector<Proposal> proposals;  // indexed like the vote matrix
  VoteMatrix votes;                 // normalized, masked
  std::vector<double> scores;       // per proposal confidence in [0,1]
  std::size_t winner = 0;

  friend bool operator==(const RoundEntry&, const RoundEntry&) = default;
};

/// Compressed record for rounds that left the active window.
struct HistorySummary {
  int round = 0;
  std::string winner_blinded_id;
  double score = 0.0;
  std::string digest;

  friend bool operator==(const HistorySummary&, const HistorySummary&) = default;
};

/// Recurrent consensus state S_t, the append-only input buffer x_t, and the
/// full history H. Mutated only through consensus::commit_state and
/// append_constraint.
class DeliberationState {
 public:
  explicit DeliberationState(std::string task = {}, int active_window = 2);

  void append_constraint(std::string constraint);

  const std::vector<std::string>& input_buffer() const { return input_buffer_; }
  const std::optional<Proposal>& consensus() const { return consensus_; }
  double consensus_score() const { return consensus_score_; }
  /// Previous consensus kept verbatim alongside the current one (high gamma).
  const std::optional<Proposal>& retained() const { return retained_; }
  const std::vector<RoundEntry>& history() const { return history_; }
  const std::vector<HistorySummary>& summaries() const { return summaries_; }
  int active_window() const { return active_window_; }
  int last_round() const { return history_.empty() ? 0 : history_.back().round; }

  /// Rounds whose full text is still in working memory.
  std::vector<const RoundEntry*> active_rounds() const;

  /// Historical-read channel for rounds outside the active window.
  std::optional<Proposal> read_proposal(int round, const std::string& blinded_id) const;

  friend bool operator==(const DeliberationState&, const DeliberationState&) = default;

 private:
  friend class StateMutator;

  std::vector<std::string> input_buffer_;
  std::optional<Proposal> consensus_;
  double consensus_score_ = 0.0;
  std::optional<Proposal> retained_;
  std::vector<RoundEntry> history_;
  std::vector<HistorySummary> summaries_;
  int active_window_ = 2;
};

/// One-line digest used in compressed history records.
std::string digest_of(const Proposal& proposal, std::size_t max_chars = 80);

}  // namespace nsed

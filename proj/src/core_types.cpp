#include "nsed/core_types.hpp"

#include <algorithm>
#include <sstream>

namespace nsed {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyTeam: return "EmptyTeam";
    case ErrorCode::NonPositiveBudget: return "NonPositiveBudget";
    case ErrorCode::GammaOutOfRange: return "GammaOutOfRange";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::NegativeVote: return "NegativeVote";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonSquareMatrix: return "NonSquareMatrix";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::InvalidRound: return "InvalidRound";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::InvalidTrajectory: return "InvalidTrajectory";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::CondorcetFail: return "CondorcetFail";
    case ErrorCode::SessionMismatch: return "SessionMismatch";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::AgentFailure: return "AgentFailure";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::NoReserves: return "NoReserves";
    case ErrorCode::MalformedOutput: return "MalformedOutput";
    case ErrorCode::HttpError: return "HttpError";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

const char* to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::dictator: return "live";
    case KernelKind::history_max: return "history_max";
    case KernelKind::linear: return "linear";
    case KernelKind::exponential: return "exponential";
  }
  return "history_max";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "live" || name == "dictator") return KernelKind::dictator;
  if (name == "history_max") return KernelKind::history_max;
  if (name == "linear") return KernelKind::linear;
  if (name == "exponential") return KernelKind::exponential;
  throw Error(ErrorCode::ConfigError, "unknown consensus strategy '" + name + "'");
}

namespace {

void check_probability(double value, const char* field) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, std::string(field) + " must lie in [0,1]");
  }
}

}  // namespace

void validate_profile(const AgentProfile& profile) {
  check_probability(profile.quality_prior, "quality_prior");
  check_probability(profile.gen_precision, "gen_precision");
  check_probability(profile.ver_precision, "ver_precision");
  check_probability(profile.halluc_rate, "halluc_rate");
  if (!(profile.price_per_token >= 0.0)) throw Error(ErrorCode::OutOfRange, "price_per_token must be >= 0");
  if (!(profile.mean_latency_s > 0.0)) throw Error(ErrorCode::OutOfRange, "mean_latency_s must be > 0");
}

std::vector<ManifestIssue> manifest_issues(const SessionManifest& m) {
  std::vector<ManifestIssue> issues;
  if (m.agents.empty()) issues.push_back({ErrorCode::EmptyTeam, "agents must be nonempty"});
  if (m.t_opt < 1) issues.push_back({ErrorCode::NonPositiveBudget, "t_opt must be >= 1"});
  if (m.vote_budget < 1) issues.push_back({ErrorCode::NonPositiveBudget, "vote_budget must be >= 1"});
  if (!(m.gamma_base >= 0.0 && m.gamma_base <= 1.0)) {
    issues.push_back({ErrorCode::GammaOutOfRange, "gamma_base must lie in [0,1]"});
  }
  std::set<AgentId> seen;
  for (const auto& id : m.agents) {
    if (!seen.insert(id).second) issues.push_back({ErrorCode::InvalidManifest, "duplicate agent '" + id.value + "'"});
  }
  if (m.epsilon < 0.0) issues.push_back({ErrorCode::InvalidManifest, "epsilon must be >= 0"});
  const auto& k = m.consensus_strategy;
  if (k.kind == KernelKind::linear && k.parameter < 0.0) {
    issues.push_back({ErrorCode::InvalidManifest, "linear kernel alpha must be >= 0"});
  }
  if (k.kind == KernelKind::exponential && !(k.parameter > 0.0)) {
    issues.push_back({ErrorCode::InvalidManifest, "exponential kernel gamma_w must be > 0"});
  }
  return issues;
}

const SessionManifest& validate_manifest(const SessionManifest& manifest) {
  auto issues = manifest_issues(manifest);
  if (issues.empty()) return manifest;
  if (issues.size() == 1) throw Error(issues.front().code, issues.front().message);
  std::ostringstream out;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) out << "; ";
    out << to_string(issues[i].code) << ": " << issues[i].message;
  }
  throw Error(ErrorCode::InvalidManifest, out.str());
}

DeliberationState::DeliberationState(std::string task, int active_window) : active_window_(active_window) {
  if (!task.empty()) input_buffer_.push_back(std::move(task));
}

void DeliberationState::append_constraint(std::string constraint) { input_buffer_.push_back(std::move(constraint)); }

std::vector<const RoundEntry*> DeliberationState::active_rounds() const {
  std::vector<const RoundEntry*> out;
  const int current = last_round();
  for (const auto& entry : history_) {
    if (entry.round >= current - active_window_) out.push_back(&entry);
  }
  return out;
}

std::optional<Proposal> DeliberationState::read_proposal(int round, const std::string& blinded_id) const {
  for (const auto& entry : history_) {
    if (entry.round != round) continue;
    for (const auto& p : entry.proposals) {
      if (p.blinded_id == blinded_id) return p;
    }
  }
  return std::nullopt;
}

std::string digest_of(const Proposal& proposal, std::size_t max_chars) {
  std::string line = proposal.answer;
  std::replace(line.begin(), line.end(), '\n', ' ');
  if (line.size() > max_chars) line = line.substr(0, max_chars - 3) + "...";
  return line;
}

}  // namespace nsed

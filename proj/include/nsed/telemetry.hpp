#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nsed/consensus.hpp"
#include "nsed/core_types.hpp"
#include "nsed/orchestrator.hpp"

namespace nsed::telemetry {

struct RoundLatency {
  int round = 0;
  double gen_s = 0.0;
  double eval_s = 0.0;
  double total_s = 0.0;
  double cumulative_s = 0.0;

  friend bool operator==(const RoundLatency&, const RoundLatency&) = default;
};

struct InfluenceReport {
  std::string session_id;
  std::string ensemble;                        // ensemble_key of the manifest team
  std::vector<AgentId> agents;                 // manifest slots, then replacements
  std::vector<std::vector<double>> influence;  // [voter][proposer], mean over rounds
  std::vector<double> influence_score;         // column sums of `influence`
  std::vector<double> vote_share;              // influence_score / (N - 1), in [0,1]
  std::vector<std::vector<double>> wins;       // [agent][round - 1], 1 if that agent won
  std::vector<RoundLatency> latency;
  std::optional<int> convergence_round;
  consensus::HaltReason halt_reason = consensus::HaltReason::None;
  int rounds = 0;
  std::vector<orchestrator::SwapEvent> swaps;

  friend bool operator==(const InfluenceReport&, const InfluenceReport&) = default;
};

/// (1/T) * sum over rounds of the off-diagonal column entries for `agent`.
/// Rounds where the agent did not take part contribute zero. Throws
/// UnknownAgent if it never appears.
double influence_score(const std::vector<RoundEntry>& history, const AgentId& agent);

/// Per round: slowest generation, slowest evaluation, their sum plus
/// `overhead_s`, and the running total.
std::vector<RoundLatency> latency_report(const std::vector<std::vector<orchestrator::AgentTiming>>& rounds,
                                         double overhead_s = 0.0);
std::vector<RoundLatency> latency_report(const orchestrator::SessionRecord& record, double overhead_s = 0.0);

InfluenceReport build_report(const orchestrator::SessionRecord& record, double overhead_s = 0.0);

struct WinRateRow {
  std::string ensemble;
  AgentId agent;
  int round = 0;
  double win_rate = 0.0;
  int sessions = 0;  // sessions of this ensemble that reached `round`

  friend bool operator==(const WinRateRow&, const WinRateRow&) = default;
};

/// Fraction of sessions (per ensemble) in which each agent's proposal won
/// round t. Sorted by ensemble, agent, round.
std::vector<WinRateRow> win_rate_matrix(const std::vector<InfluenceReport>& sessions);

struct ExportPaths {
  std::filesystem::path influence_csv;
  std::filesystem::path win_rate_csv;
  std::filesystem::path latency_csv;
  std::filesystem::path bundle_json;
};

enum class ExportFormat { csv, json, both };

/// Writes influence.csv, win_rate.csv, latency.csv and/or telemetry.json into
/// `directory`. Throws IoError.
ExportPaths export_reports(const std::vector<InfluenceReport>& reports, const std::filesystem::path& directory,
                           ExportFormat format = ExportFormat::both);

/// Reads back a telemetry.json bundle.
std::vector<InfluenceReport> import_bundle(const std::filesystem::path& bundle_json);

/// Reads influence.csv and latency.csv back into per-session partial
/// reports (session_id, agents, influence, latency only).
std::vector<InfluenceReport> import_csv(const std::filesystem::path& directory);

}  // namespace nsed::telemetry

#pragma once

#include <filesystem>

#include <json.hpp>

#include "nsed/agents.hpp"
#include "nsed/broker.hpp"
#include "nsed/consensus.hpp"
#include "nsed/core_types.hpp"
#include "nsed/orchestrator.hpp"
#include "nsed/telemetry.hpp"
#include "nsed/thermo.hpp"

// JSON schema for every exchanged type. Field names match the C++ members;
// enums are written as their lower-case or CamelCase names as used by
// to_string. Optional inputs fall back to the struct defaults.

namespace nsed {

void to_json(nlohmann::json& j, const AgentId& v);
void from_json(const nlohmann::json& j, AgentId& v);
void to_json(nlohmann::json& j, const AgentProfile& v);
void from_json(const nlohmann::json& j, AgentProfile& v);
void to_json(nlohmann::json& j, const Sla& v);
void from_json(const nlohmann::json& j, Sla& v);
void to_json(nlohmann::json& j, const Proposal& v);
void from_json(const nlohmann::json& j, Proposal& v);
void to_json(nlohmann::json& j, const VoteMatrix& v);
void from_json(const nlohmann::json& j, VoteMatrix& v);
/// Accepts {"kind": ..., "parameter": ...} or a bare kind string.
void to_json(nlohmann::json& j, const TemporalKernel& v);
void from_json(const nlohmann::json& j, TemporalKernel& v);
void to_json(nlohmann::json& j, const ThermoParams& v);
void from_json(const nlohmann::json& j, ThermoParams& v);
void to_json(nlohmann::json& j, const SessionManifest& v);
void from_json(const nlohmann::json& j, SessionManifest& v);
void to_json(nlohmann::json& j, const RoundEntry& v);
void from_json(const nlohmann::json& j, RoundEntry& v);
void to_json(nlohmann::json& j, const HistorySummary& v);
void from_json(const nlohmann::json& j, HistorySummary& v);
void to_json(nlohmann::json& j, const DeliberationState& v);

namespace consensus {
void to_json(nlohmann::json& j, const RoundOutcome& v);
void from_json(const nlohmann::json& j, RoundOutcome& v);
void to_json(nlohmann::json& j, const HaltReason& v);
void from_json(const nlohmann::json& j, HaltReason& v);
}  // namespace consensus

namespace thermo {
void to_json(nlohmann::json& j, const TrajectoryPoint& v);
void from_json(const nlohmann::json& j, TrajectoryPoint& v);
}  // namespace thermo

namespace broker {
void to_json(nlohmann::json& j, const TaskProfile& v);
void from_json(const nlohmann::json& j, TaskProfile& v);
void to_json(nlohmann::json& j, const CompositionSolution& v);
void from_json(const nlohmann::json& j, CompositionSolution& v);
}  // namespace broker

namespace agents {
void to_json(nlohmann::json& j, const CandidateView& v);
void from_json(const nlohmann::json& j, CandidateView& v);
void to_json(nlohmann::json& j, const RecentWinner& v);
void to_json(nlohmann::json& j, const ContextPacket& v);
void to_json(nlohmann::json& j, const SimParams& v);
void from_json(const nlohmann::json& j, SimParams& v);
void to_json(nlohmann::json& j, const RemoteParams& v);
void from_json(const nlohmann::json& j, RemoteParams& v);
/// Profile fields at top level plus "backend": {"type": "simulated"|"remote", ...}.
void to_json(nlohmann::json& j, const AgentBinding& v);
void from_json(const nlohmann::json& j, AgentBinding& v);
}  // namespace agents

namespace orchestrator {
void to_json(nlohmann::json& j, const Event& v);
void from_json(const nlohmann::json& j, Event& v);
void to_json(nlohmann::json& j, const AgentTiming& v);
void from_json(const nlohmann::json& j, AgentTiming& v);
void to_json(nlohmann::json& j, const SwapEvent& v);
void from_json(const nlohmann::json& j, SwapEvent& v);
void to_json(nlohmann::json& j, const SessionRecord& v);
void from_json(const nlohmann::json& j, SessionRecord& v);
}  // namespace orchestrator

namespace telemetry {
void to_json(nlohmann::json& j, const RoundLatency& v);
void from_json(const nlohmann::json& j, RoundLatency& v);
void to_json(nlohmann::json& j, const InfluenceReport& v);
void from_json(const nlohmann::json& j, InfluenceReport& v);
}  // namespace telemetry

namespace json_io {

/// Parses a file, mapping I/O failures to IoError and syntax or schema
/// failures to ConfigError.
nlohmann::json read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const nlohmann::json& value, int indent = 2);

template <class T>
T load(const std::filesystem::path& path) {
  const auto j = read_file(path);
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

}  // namespace json_io

}  // namespace nsed

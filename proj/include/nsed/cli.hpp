#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nsed/agents.hpp"
#include "nsed/broker.hpp"
#include "nsed/orchestrator.hpp"
#include "nsed/telemetry.hpp"
#include "nsed/thermo.hpp"

namespace nsed::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kInfeasible = 3,
  kCondorcetFail = 4,
  kAgentFailure = 5,
  kFitError = 6,
  kTimeout = 7,
};

int exit_code_for(ErrorCode code);

/// {"agents": [binding...], "reserves": [binding...]}
struct PoolFile {
  std::vector<agents::AgentBinding> agents;
  std::vector<agents::AgentBinding> reserves;
};

PoolFile load_pool(const fs::path& path);
void save_pool(const fs::path& path, const PoolFile& pool);

/// Reads a CSV with a header containing `round` and `accuracy` columns.
thermo::Trajectory load_trajectory(const fs::path& path);

/// Appends one JSON line per report: session_id, ensemble, rounds,
/// convergence_round (null when the session did not converge) and vote shares.
void append_feedback_log(const fs::path& path, const std::vector<telemetry::InfluenceReport>& reports);

/// Rebuilds broker memory from a feedback log; a missing file is empty memory.
broker::BrokerMemory load_feedback_log(const fs::path& path);

struct ComposeConfig {
  fs::path pool;
  std::optional<fs::path> memory;
  std::optional<fs::path> task;
  Sla sla{1e12, 1e12, 0.0, 0.0};
  broker::BrokerConfig broker;
  fs::path out = "manifest.json";
  std::vector<double> lambda_sweep;
  std::optional<fs::path> sweep_out;
};

broker::Composition cmd_compose(const ComposeConfig& config, std::ostream& log);

struct RunConfig {
  fs::path pool;
  std::optional<fs::path> task;
  std::optional<fs::path> manifest;  // otherwise the whole pool, in file order
  fs::path out = "out";
  std::uint64_t seed = 0;
  int replications = 1;
  int rounds = 7;
  double epsilon = 0.0;
  double gamma_base = 0.8;
  TemporalKernel strategy{KernelKind::history_max, 0.0};
  double timeout_s = 60.0;
  double overhead_s = 0.0;
  std::optional<double> max_latency_s;
  std::optional<fs::path> constraints;  // polled between rounds in `run`
  bool parallel = true;
};

struct SimulationResult {
  std::vector<double> accuracy;  // per round
  std::vector<double> stderr_;
  std::vector<int> sessions;
  std::vector<telemetry::InfluenceReport> reports;
  std::optional<ThermoParams> fit;
};

/// Runs `replications` seeded sessions of simulated agents and writes
/// trajectory.csv plus telemetry exports into `config.out`.
SimulationResult cmd_simulate(const RunConfig& config, std::ostream& log);

struct FitConfig {
  fs::path trajectory;
  double p_g = 0.0;
  std::optional<double> p_v;
  bool fit_pv = false;
  double efficiency = 4.0;  // pinned Lambda when fit_pv is set
  std::optional<int> t_max;
  fs::path out = "fit";
};

ThermoParams cmd_fit(const FitConfig& config, std::ostream& log);

/// One live session; writes session.json, phase_timing.csv and telemetry.
orchestrator::SessionRecord cmd_run(const RunConfig& config, std::ostream& log);

struct ReportConfig {
  fs::path telemetry;
  std::optional<fs::path> manifest;
  std::optional<fs::path> pool;
  std::optional<fs::path> update_pool;
  std::optional<fs::path> feedback_log;
};

void cmd_report(const ReportConfig& config, std::ostream& log);

/// Parses arguments, dispatches, and maps errors to exit codes.
int run_cli(int argc, char** argv);

}  // namespace nsed::cli

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsed/core_types.hpp"

namespace nsed::telemetry {
struct InfluenceReport;
}

namespace nsed::broker {

enum class Complexity { low, medium, high };

struct TaskProfile {
  std::string description;
  std::set<std::string> domain_tags;
  int est_tokens_per_round = 1000;
  Complexity complexity_hint = Complexity::medium;

  friend bool operator==(const TaskProfile&, const TaskProfile&) = default;
};

const char* to_string(Complexity c);
Complexity complexity_from_string(const std::string& name);

struct BrokerConfig {
  // Thermodynamic prior used to predict utility for a candidate team.
  double efficiency = 4.31;
  double fatigue = 0.0029;
  double overhead_net_s = 2.0;
  int t_search_max = 8;
  std::size_t exhaustive_limit = 12;
  double ema_weight = 0.3;
  // Copied into the emitted manifest.
  double gamma_base = 0.8;
  double epsilon = 0.02;
  TemporalKernel strategy{KernelKind::history_max, 0.0};
  int vote_budget = 100;
  std::uint64_t seed = 0;
};

struct CompositionSolution {
  std::vector<std::size_t> members;  // indices into the pool, ascending
  int t = 1;
  double predicted_utility = 0.0;
  double predicted_cost = 0.0;
  double predicted_latency_s = 0.0;
  double mean_quality = 0.0;
  double mean_ver_precision = 0.0;
  double objective = 0.0;
};

struct Composition {
  SessionManifest manifest;
  CompositionSolution solution;
};

/// Session-level record of what the broker has learned: convergence rounds
/// per ensemble, used to tighten future budgets.
struct BrokerMemory {
  std::map<std::string, std::vector<int>> convergence_rounds;  // 0 = did not converge

  std::optional<int> t_cap(const std::vector<AgentId>& team) const;
};

std::string ensemble_key(const std::vector<AgentId>& team);

/// Sum over agents of price_per_token * est_tokens_per_round * t.
double estimate_cost(const std::vector<AgentProfile>& agents, int t, const TaskProfile& task);

/// t * (max mean latency + overhead); zero agents cost zero time.
double estimate_latency(const std::vector<AgentProfile>& agents, int t, double overhead_net_s);

/// Fraction-of-task-tags factor in [0.5, 1]; 1 when the task has no tags.
double domain_factor(const std::vector<AgentProfile>& agents, const TaskProfile& task);

/// Ensemble-level precision: p_g = max over agents, p_v = mean over agents.
ThermoParams ensemble_params(const std::vector<AgentProfile>& agents, const BrokerConfig& config);

/// Scores (team, t) against the objective and constraints. Returns nullopt
/// when any SLA predicate or the Condorcet gate fails.
std::optional<CompositionSolution> evaluate_team(const std::vector<AgentProfile>& pool,
                                                 const std::vector<std::size_t>& members, int t,
                                                 const TaskProfile& task, const Sla& sla,
                                                 const BrokerConfig& config);

/// Total order used to pick between equally good solutions: objective,
/// then lower cost, lower latency, larger team, lexicographically smaller
/// member list, smaller t.
bool better_solution(const CompositionSolution& a, const CompositionSolution& b);

/// Maximizes E(A,T) = Utility(A,T|task) - lambda * Cost(A,T) subject to the SLA
/// and the Condorcet gate. Throws Infeasible or CondorcetFail.
Composition compose_session(const std::vector<AgentProfile>& pool, const TaskProfile& task, const Sla& sla,
                            const BrokerConfig& config = {}, const BrokerMemory* memory = nullptr);

/// Post-hoc check of every SLA predicate for a returned solution.
bool satisfies_sla(const std::vector<AgentProfile>& pool, const CompositionSolution& solution,
                   const TaskProfile& task, const Sla& sla, const BrokerConfig& config);

/// EMA update of each manifest agent's quality_prior toward its observed vote
/// share, plus convergence bookkeeping in `memory`.
std::vector<AgentProfile> record_feedback(std::vector<AgentProfile> pool, BrokerMemory& memory,
                                          const SessionManifest& manifest,
                                          const telemetry::InfluenceReport& report, double ema_weight = 0.3);

}  // namespace nsed::broker

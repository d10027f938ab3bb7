#include "nsed/broker.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "nsed/telemetry.hpp"
#include "nsed/thermo.hpp"

namespace nsed::broker {

const char* to_string(Complexity c) {
  switch (c) {
    case Complexity::low: return "low";
    case Complexity::medium: return "medium";
    case Complexity::high: return "high";
  }
  return "medium";
}

Complexity complexity_from_string(const std::string& name) {
  if (name == "low") return Complexity::low;
  if (name == "medium") return Complexity::medium;
  if (name == "high") return Complexity::high;
  throw Error(ErrorCode::ConfigError, "unknown complexity '" + name + "'");
}

std::optional<int> BrokerMemory::t_cap(const std::vector<AgentId>& team) const {
  auto it = convergence_rounds.find(ensemble_key(team));
  if (it == convergence_rounds.end() || it->second.size() < 3) return std::nullopt;
  const auto& rounds = it->second;
  int cap = 0;
  for (auto r = rounds.end() - 3; r != rounds.end(); ++r) {
    if (*r <= 0) return std::nullopt;
    cap = std::max(cap, *r);
  }
  return cap;
}

std::string ensemble_key(const std::vector<AgentId>& team) {
  std::vector<std::string> ids;
  for (const auto& id : team) ids.push_back(id.value);
  std::sort(ids.begin(), ids.end());
  std::string key;
  for (const auto& id : ids) {
    if (!key.empty()) key += '+';
    key += id;
  }
  return key;
}

double estimate_cost(const std::vector<AgentProfile>& agents, int t, const TaskProfile& task) {
  if (t < 1) throw Error(ErrorCode::PreconditionViolated, "t must be >= 1");
  double cost = 0.0;
  for (const auto& a : agents) cost += a.price_per_token * task.est_tokens_per_round * t;
  return cost;
}

double estimate_latency(const std::vector<AgentProfile>& agents, int t, double overhead_net_s) {
  if (t < 1) throw Error(ErrorCode::PreconditionViolated, "t must be >= 1");
  if (agents.empty()) return 0.0;
  double slowest = 0.0;
  for (const auto& a : agents) slowest = std::max(slowest, a.mean_latency_s);
  return t * (slowest + overhead_net_s);
}

double domain_factor(const std::vector<AgentProfile>& agents, const TaskProfile& task) {
  if (task.domain_tags.empty()) return 1.0;
  std::size_t covered = 0;
  for (const auto& tag : task.domain_tags) {
    const bool hit = std::any_of(agents.begin(), agents.end(),
                                 [&](const AgentProfile& a) { return a.domain_tags.count(tag) > 0; });
    covered += hit ? 1 : 0;
  }
  return 0.5 + 0.5 * static_cast<double>(covered) / static_cast<double>(task.domain_tags.size());
}

ThermoParams ensemble_params(const std::vector<AgentProfile>& agents, const BrokerConfig& config) {
  ThermoParams p;
  p.efficiency = config.efficiency;
  p.fatigue = config.fatigue;
  if (agents.empty()) return p;
  for (const auto& a : agents) {
    p.p_g = std::max(p.p_g, a.gen_precision);
    p.p_v += a.ver_precision;
  }
  p.p_v /= static_cast<double>(agents.size());
  return p;
}

namespace {

std::vector<AgentProfile> pick(const std::vector<AgentProfile>& pool, const std::vector<std::size_t>& members) {
  std::vector<AgentProfile> team;
  team.reserve(members.size());
  for (auto i : members) team.push_back(pool.at(i));
  return team;
}

struct Scored {
  CompositionSolution solution;
  bool sla_ok = false;
  bool gate_ok = false;
};

// Objective and every predicate for one (team, t); no filtering.
Scored score(const std::vector<AgentProfile>& pool, const std::vector<std::size_t>& members, int t,
             const TaskProfile& task, const Sla& sla, const BrokerConfig& config) {
  const auto team = pick(pool, members);
  Scored s;
  auto& sol = s.solution;
  sol.members = members;
  sol.t = t;
  sol.predicted_cost = estimate_cost(team, t, task);
  sol.predicted_latency_s = estimate_latency(team, t, config.overhead_net_s);
  const auto params = ensemble_params(team, config);
  sol.predicted_utility = domain_factor(team, task) * thermo::utility(t, params);
  sol.mean_ver_precision = params.p_v;
  double quality = 0.0;
  for (const auto& a : team) quality += a.quality_prior;
  sol.mean_quality = team.empty() ? 0.0 : quality / static_cast<double>(team.size());
  sol.objective = sol.predicted_utility - sla.elasticity * sol.predicted_cost;
  s.sla_ok = !team.empty() && sol.predicted_latency_s <= sla.max_latency_s && sol.predicted_cost <= sla.max_cost &&
             sol.mean_quality >= sla.min_quality;
  s.gate_ok = thermo::condorcet_gate(params.p_v);
  return s;
}

struct Search {
  const std::vector<AgentProfile>& pool;
  const TaskProfile& task;
  const Sla& sla;
  const BrokerConfig& config;
  int t_cap;
  const BrokerMemory* memory = nullptr;

  std::optional<CompositionSolution> best;
  bool any_sla_feasible = false;
  // Per-constraint reachability, for diagnostics.
  bool latency_ok = false, cost_ok = false, quality_ok = false;

  // Learned per-ensemble budget caps tighten the search horizon.
  int cap_for(const std::vector<std::size_t>& members) const {
    if (!memory) return t_cap;
    std::vector<AgentId> team;
    for (auto i : members) team.push_back(pool[i].id);
    const auto cap = memory->t_cap(team);
    return cap ? std::min(t_cap, *cap) : t_cap;
  }

  void consider(const std::vector<std::size_t>& members) {
    const int horizon = cap_for(members);
    for (int t = 1; t <= horizon; ++t) {
      const auto s = score(pool, members, t, task, sla, config);
      latency_ok |= s.solution.predicted_latency_s <= sla.max_latency_s;
      cost_ok |= s.solution.predicted_cost <= sla.max_cost;
      quality_ok |= s.solution.mean_quality >= sla.min_quality;
      if (!s.sla_ok) continue;
      any_sla_feasible = true;
      if (!s.gate_ok) continue;
      if (!best || better_solution(s.solution, *best)) best = s.solution;
    }
  }

  // Cost and latency only grow when an agent joins, so a branch whose t = 1
  // cost or latency already breaks the SLA is cut with all of its supersets.
  void branch_and_bound(std::vector<std::size_t>& members, std::size_t next) {
    for (std::size_t k = next; k < pool.size(); ++k) {
      members.push_back(k);
      const auto team = pick(pool, members);
      const bool prunable = estimate_cost(team, 1, task) > sla.max_cost ||
                            estimate_latency(team, 1, config.overhead_net_s) > sla.max_latency_s;
      if (prunable) {
        // Record per-constraint reachability for diagnostics only.
        const auto s = score(pool, members, 1, task, sla, config);
        latency_ok |= s.solution.predicted_latency_s <= sla.max_latency_s;
        cost_ok |= s.solution.predicted_cost <= sla.max_cost;
        quality_ok |= s.solution.mean_quality >= sla.min_quality;
      } else {
        consider(members);
        branch_and_bound(members, k + 1);
      }
      members.pop_back();
    }
  }

  std::optional<CompositionSolution> best_t(const std::vector<std::size_t>& members) {
    std::optional<CompositionSolution> local;
    const int horizon = cap_for(members);
    for (int t = 1; t <= horizon; ++t) {
      const auto s = score(pool, members, t, task, sla, config);
      latency_ok |= s.solution.predicted_latency_s <= sla.max_latency_s;
      cost_ok |= s.solution.predicted_cost <= sla.max_cost;
      quality_ok |= s.solution.mean_quality >= sla.min_quality;
      if (!s.sla_ok) continue;
      any_sla_feasible = true;
      if (!s.gate_ok) continue;
      if (!local || better_solution(s.solution, *local)) local = s.solution;
    }
    return local;
  }

  // Greedy construction by marginal objective gain, then add/drop/swap local search.
  void greedy_local() {
    std::vector<std::size_t> current;
    std::optional<CompositionSolution> current_best;
    auto try_set = [&](std::vector<std::size_t> members) -> bool {
      std::sort(members.begin(), members.end());
      auto candidate = best_t(members);
      if (candidate && (!current_best || better_solution(*candidate, *current_best))) {
        current_best = candidate;
        current = members;
        return true;
      }
      return false;
    };
    for (std::size_t k = 0; k < pool.size(); ++k) try_set({k});
    // Seeds with no feasible single agent still need a starting point.
    if (!current_best) {
      for (std::size_t a = 0; a < pool.size() && !current_best; ++a) {
        for (std::size_t b = a + 1; b < pool.size(); ++b) try_set({a, b});
      }
    }
    bool improved = true;
    while (improved && current_best) {
      improved = false;
      const auto base = current;
      for (std::size_t k = 0; k < pool.size(); ++k) {
        if (std::find(base.begin(), base.end(), k) != base.end()) continue;
        auto grown = base;
        grown.push_back(k);
        improved |= try_set(grown);
      }
      for (std::size_t drop = 0; drop < base.size() && base.size() > 1; ++drop) {
        auto shrunk = base;
        shrunk.erase(shrunk.begin() + static_cast<std::ptrdiff_t>(drop));
        improved |= try_set(shrunk);
      }
      for (std::size_t out = 0; out < base.size(); ++out) {
        for (std::size_t in = 0; in < pool.size(); ++in) {
          if (std::find(base.begin(), base.end(), in) != base.end()) continue;
          auto swapped = base;
          swapped[out] = in;
          improved |= try_set(swapped);
        }
      }
    }
    best = current_best;
  }
};

std::string format_number(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

}  // namespace

std::optional<CompositionSolution> evaluate_team(const std::vector<AgentProfile>& pool,
                                                 const std::vector<std::size_t>& members, int t,
                                                 const TaskProfile& task, const Sla& sla,
                                                 const BrokerConfig& config) {
  auto s = score(pool, members, t, task, sla, config);
  if (!s.sla_ok || !s.gate_ok) return std::nullopt;
  return s.solution;
}

bool better_solution(const CompositionSolution& a, const CompositionSolution& b) {
  if (a.objective != b.objective) return a.objective > b.objective;
  if (a.predicted_cost != b.predicted_cost) return a.predicted_cost < b.predicted_cost;
  if (a.predicted_latency_s != b.predicted_latency_s) return a.predicted_latency_s < b.predicted_latency_s;
  if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
  if (a.members != b.members) return a.members < b.members;
  return a.t < b.t;
}

Composition compose_session(const std::vector<AgentProfile>& pool, const TaskProfile& task, const Sla& sla,
                            const BrokerConfig& config, const BrokerMemory* memory) {
  if (pool.empty()) throw Error(ErrorCode::PreconditionViolated, "agent pool is empty");
  if (task.est_tokens_per_round <= 0) throw Error(ErrorCode::PreconditionViolated, "est_tokens_per_round must be > 0");
  for (const auto& a : pool) validate_profile(a);

  Search search{pool, task, sla, config, std::max(1, config.t_search_max), memory, std::nullopt};

  if (pool.size() <= config.exhaustive_limit) {
    std::vector<std::size_t> members;
    search.branch_and_bound(members, 0);
  } else {
    search.greedy_local();
  }

  if (!search.best) {
    if (search.any_sla_feasible) {
      throw Error(ErrorCode::CondorcetFail, "every SLA-feasible team has mean verifier precision <= 0.5");
    }
    std::vector<std::string> failed;
    if (!search.latency_ok) failed.push_back("latency (max_latency_s=" + format_number(sla.max_latency_s) + ")");
    if (!search.cost_ok) failed.push_back("cost (max_cost=" + format_number(sla.max_cost) + ")");
    if (!search.quality_ok) failed.push_back("quality (min_quality=" + format_number(sla.min_quality) + ")");
    std::string message = "no team satisfies the SLA";
    if (failed.empty()) {
      message += ": constraints are individually reachable but not jointly";
    } else {
      message += "; unreachable constraint(s): ";
      for (std::size_t i = 0; i < failed.size(); ++i) message += (i ? ", " : "") + failed[i];
    }
    throw Error(ErrorCode::Infeasible, message);
  }

  Composition out;
  out.solution = *search.best;
  auto& m = out.manifest;
  for (auto i : out.solution.members) m.agents.push_back(pool[i].id);
  m.t_opt = out.solution.t;
  m.gamma_base = config.gamma_base;
  m.epsilon = config.epsilon;
  m.consensus_strategy = config.strategy;
  m.vote_budget = config.vote_budget;
  m.seed = config.seed;
  m.session_id = "session-" + std::to_string(config.seed);
  validate_manifest(m);
  return out;
}

bool satisfies_sla(const std::vector<AgentProfile>& pool, const CompositionSolution& solution,
                   const TaskProfile& task, const Sla& sla, const BrokerConfig& config) {
  if (solution.members.empty()) return false;
  const auto team = pick(pool, solution.members);
  double quality = 0.0;
  double pv = 0.0;
  for (const auto& a : team) {
    quality += a.quality_prior;
    pv += a.ver_precision;
  }
  quality /= static_cast<double>(team.size());
  pv /= static_cast<double>(team.size());
  return estimate_latency(team, solution.t, config.overhead_net_s) <= sla.max_latency_s &&
         estimate_cost(team, solution.t, task) <= sla.max_cost && quality >= sla.min_quality &&
         thermo::condorcet_gate(pv);
}

std::vector<AgentProfile> record_feedback(std::vector<AgentProfile> pool, BrokerMemory& memory,
                                          const SessionManifest& manifest,
                                          const telemetry::InfluenceReport& report, double ema_weight) {
  if (report.session_id != manifest.session_id) {
    throw Error(ErrorCode::SessionMismatch,
                "report for '" + report.session_id + "' does not belong to '" + manifest.session_id + "'");
  }
  for (const auto& id : report.agents) {
    const bool in_manifest = std::find(manifest.agents.begin(), manifest.agents.end(), id) != manifest.agents.end();
    const bool swapped_in = std::any_of(report.swaps.begin(), report.swaps.end(),
                                        [&](const orchestrator::SwapEvent& s) { return s.replacement == id; });
    if (!in_manifest && !swapped_in) {
      throw Error(ErrorCode::SessionMismatch, "agent '" + id.value + "' is not part of the manifest");
    }
  }
  if (report.rounds == 0) return pool;

  for (std::size_t i = 0; i < report.agents.size(); ++i) {
    auto it = std::find_if(pool.begin(), pool.end(), [&](const AgentProfile& a) { return a.id == report.agents[i]; });
    if (it == pool.end()) continue;
    const double share = std::clamp(report.vote_share.at(i), 0.0, 1.0);
    it->quality_prior = std::clamp((1.0 - ema_weight) * it->quality_prior + ema_weight * share, 0.0, 1.0);
  }
  memory.convergence_rounds[ensemble_key(manifest.agents)].push_back(report.convergence_round.value_or(0));
  return pool;
}

}  // namespace nsed::broker

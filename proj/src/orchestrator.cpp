#include "nsed/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>

#include "nsed/broker.hpp"
#include "nsed/thermo.hpp"
#include "nsed/voting.hpp"

namespace nsed::orchestrator {

namespace {

class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Unbiased draw in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::uint64_t state_;
};

std::string hex_token(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%012llx", static_cast<unsigned long long>(value & 0xFFFFFFFFFFFFULL));
  return std::string("c-") + buf;
}

agents::CandidateView view_of(const Proposal& p) { return {p.blinded_id, p.reasoning, p.answer}; }

struct GenResult {
  bool ok = false;
  agents::GenerationReply reply;
  std::string error;
};

struct EvalResult {
  bool ok = false;
  std::vector<agents::EvaluationReply> replies;
  double elapsed_s = 0.0;
  std::string error;
};

GenResult run_generate(agents::Agent& agent, const agents::ContextPacket& ctx, double timeout_s) {
  GenResult r;
  try {
    r.reply = agent.generate(ctx);
    if (r.reply.elapsed_s > timeout_s) {
      r.error = "generation exceeded timeout";
    } else {
      r.ok = true;
    }
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

EvalResult run_evaluate(agents::Agent& agent, const std::vector<agents::CandidateView>& candidates,
                        const agents::ContextPacket& ctx, double timeout_s) {
  EvalResult r;
  try {
    for (const auto& c : candidates) {
      r.replies.push_back(agent.evaluate(c, ctx));
      r.elapsed_s += r.replies.back().elapsed_s;
    }
    if (r.elapsed_s > timeout_s) {
      r.error = "evaluation exceeded timeout";
    } else {
      r.ok = true;
    }
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

template <class Result, class Fn>
std::vector<Result> fan_out(std::size_t n, bool parallel, Fn fn) {
  std::vector<Result> out(n);
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::future<Result>> futures;
  futures.reserve(n);
  for (std::size_t i = 0; i < n; ++i) futures.push_back(std::async(std::launch::async, fn, i));
  for (std::size_t i = 0; i < n; ++i) out[i] = futures[i].get();  // barrier
  return out;
}

}  // namespace

AnonymizedSet anonymize(const std::vector<Proposal>& candidates, std::uint64_t seed) {
  AnonymizedSet out;
  out.author_index.resize(candidates.size());
  std::iota(out.author_index.begin(), out.author_index.end(), std::size_t{0});
  SplitMix rng(seed);
  for (std::size_t i = candidates.size(); i > 1; --i) {
    std::swap(out.author_index[i - 1], out.author_index[rng.below(i)]);
  }
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    auto view = view_of(candidates[out.author_index[k]]);
    view.blinded_id = hex_token(rng.next()) + std::to_string(k);
    out.candidates.push_back(std::move(view));
  }
  return out;
}

std::size_t hot_swap(const AgentProfile& stalled, const std::vector<AgentProfile>& reserves) {
  if (reserves.empty()) throw Error(ErrorCode::NoReserves, "no reserve agent for " + stalled.id.value);
  std::size_t best = 0;
  double best_distance = 0.0;
  for (std::size_t i = 0; i < reserves.size(); ++i) {
    const double d = std::abs(reserves[i].ver_precision - stalled.ver_precision) +
                     std::abs(reserves[i].gen_precision - stalled.gen_precision);
    if (i == 0 || d < best_distance || (d == best_distance && reserves[i].id < reserves[best].id)) {
      best = i;
      best_distance = d;
    }
  }
  return best;
}

std::vector<AgentProfile> ReservePool::profiles() const {
  std::vector<AgentProfile> out;
  for (const auto& a : agents_) out.push_back(a->profile());
  return out;
}

std::unique_ptr<agents::Agent> ReservePool::take_for(const AgentProfile& stalled) {
  const auto idx = hot_swap(stalled, profiles());
  auto agent = std::move(agents_[idx]);
  agents_.erase(agents_.begin() + static_cast<std::ptrdiff_t>(idx));
  return agent;
}

agents::ContextPacket build_context(const DeliberationState& state, int round, const std::vector<std::string>& critiques,
                                    const std::optional<VoteMatrix>& previous_votes) {
  agents::ContextPacket packet;
  packet.round = round;
  packet.input_buffer = state.input_buffer();
  if (state.consensus()) packet.consensus = view_of(*state.consensus());
  packet.consensus_score = state.consensus_score();
  if (state.retained()) packet.retained = view_of(*state.retained());
  for (const auto* entry : state.active_rounds()) {
    packet.recent_winners.push_back(
        {entry->round, view_of(entry->proposals.at(entry->winner)), entry->scores.at(entry->winner)});
  }
  packet.summaries = state.summaries();
  packet.critiques = critiques;
  if (previous_votes) {
    packet.previous_votes = previous_votes;
    for (std::size_t k = 0; k < previous_votes->size; ++k) {
      packet.controversy.push_back(voting::controversy_score(*previous_votes, k));
    }
  }
  return packet;
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::round_started: return "round_started";
    case EventKind::constraint_added: return "constraint_added";
    case EventKind::generate_requested: return "generate_requested";
    case EventKind::proposal_received: return "proposal_received";
    case EventKind::evaluate_requested: return "evaluate_requested";
    case EventKind::evaluation_received: return "evaluation_received";
    case EventKind::agent_stalled: return "agent_stalled";
    case EventKind::hot_swapped: return "hot_swapped";
    case EventKind::agent_dropped: return "agent_dropped";
    case EventKind::round_committed: return "round_committed";
    case EventKind::halted: return "halted";
  }
  return "round_started";
}

EventKind event_kind_from_string(const std::string& name) {
  for (int k = 0; k <= static_cast<int>(EventKind::halted); ++k) {
    const auto kind = static_cast<EventKind>(k);
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorCode::ConfigError, "unknown event kind '" + name + "'");
}

SessionRecord run_deliberation(const broker::TaskProfile& task, const SessionManifest& manifest,
                               std::vector<std::unique_ptr<agents::Agent>>& team, ReservePool& reserves,
                               const RunOptions& options) {
  return run_deliberation(task.description, manifest, team, reserves, options);
}

SessionRecord run_deliberation(const std::string& task, const SessionManifest& manifest,
                               std::vector<std::unique_ptr<agents::Agent>>& team, ReservePool& reserves,
                               const RunOptions& options) {
  validate_manifest(manifest);
  if (team.size() != manifest.agents.size()) {
    throw Error(ErrorCode::PreconditionViolated, "team size does not match the manifest");
  }
  for (std::size_t s = 0; s < team.size(); ++s) {
    if (!team[s] || team[s]->profile().id != manifest.agents[s]) {
      throw Error(ErrorCode::PreconditionViolated, "agent in slot " + std::to_string(s) + " does not match the manifest");
    }
  }

  SessionRecord record;
  record.manifest = manifest;
  DeliberationState state(task);
  const std::size_t slots = team.size();
  std::vector<std::vector<std::string>> feedback(slots);
  std::optional<VoteMatrix> blinded_votes;
  double cumulative_s = 0.0;

  auto log = [&](int round, EventKind kind, const std::string& agent, std::string detail = {}) {
    record.events.push_back({round, kind, agent, std::move(detail)});
  };

  // Replaces a stalled slot from the reserve pool. Returns false when the
  // pool is exhausted and the slot must sit out the round.
  auto swap_in = [&](std::size_t slot, int round, const char* phase) {
    if (reserves.empty()) return false;
    const AgentProfile stalled = team[slot]->profile();
    team[slot] = reserves.take_for(stalled);
    record.swaps.push_back({round, phase, stalled.id, team[slot]->profile().id});
    log(round, EventKind::hot_swapped, team[slot]->profile().id.value, "replaces " + stalled.id.value + " in " + phase);
    return true;
  };

  for (int t = 1; t <= manifest.t_opt; ++t) {
    log(t, EventKind::round_started, "");
    if (options.constraint_source) {
      for (auto& c : options.constraint_source(t)) {
        log(t, EventKind::constraint_added, "", c);
        state.append_constraint(std::move(c));
      }
    }

    // Phase 1: parallel generation, then barrier.
    std::vector<agents::ContextPacket> contexts;
    for (std::size_t s = 0; s < slots; ++s) contexts.push_back(build_context(state, t, feedback[s], blinded_votes));
    for (std::size_t s = 0; s < slots; ++s) log(t, EventKind::generate_requested, team[s]->profile().id.value);
    auto gen = fan_out<GenResult>(slots, options.parallel, [&](std::size_t s) {
      return run_generate(*team[s], contexts[s], options.agent_timeout_s);
    });

    std::vector<bool> active(slots, true);
    for (std::size_t s = 0; s < slots; ++s) {
      while (!gen[s].ok) {
        log(t, EventKind::agent_stalled, team[s]->profile().id.value, "generate: " + gen[s].error);
        if (!swap_in(s, t, "generate")) {
          active[s] = false;
          log(t, EventKind::agent_dropped, team[s]->profile().id.value, "generate");
          break;
        }
        gen[s] = run_generate(*team[s], contexts[s], options.agent_timeout_s);
      }
      if (active[s]) {
        log(t, EventKind::proposal_received, team[s]->profile().id.value,
            gen[s].reply.heuristic ? "heuristic unwrap" : "");
      }
    }

    std::vector<std::size_t> live;
    for (std::size_t s = 0; s < slots; ++s) {
      if (active[s]) live.push_back(s);
    }
    if (live.empty()) throw Error(ErrorCode::AgentFailure, "every agent failed in round " + std::to_string(t));

    // Phase 2: anonymize and shuffle.
    std::vector<Proposal> raw_proposals;
    for (auto s : live) {
      raw_proposals.push_back({t, team[s]->profile().id, "", gen[s].reply.reasoning, gen[s].reply.answer});
    }
    const auto blinded = anonymize(raw_proposals, agents::mix_seed(manifest.seed, static_cast<std::uint64_t>(t)));
    // Presentation order k -> slot
    std::vector<std::size_t> order;
    std::vector<Proposal> presented;
    for (std::size_t k = 0; k < blinded.candidates.size(); ++k) {
      order.push_back(live[blinded.author_index[k]]);
      Proposal p = raw_proposals[blinded.author_index[k]];
      p.blinded_id = blinded.candidates[k].blinded_id;
      presented.push_back(std::move(p));
    }

    // Phase 3: every evaluator scores every candidate, then barrier.
    for (auto s : order) log(t, EventKind::evaluate_requested, team[s]->profile().id.value);
    auto eval = fan_out<EvalResult>(order.size(), options.parallel, [&](std::size_t k) {
      return run_evaluate(*team[order[k]], blinded.candidates, contexts[order[k]], options.agent_timeout_s);
    });
    std::vector<bool> scored(order.size(), true);
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto s = order[k];
      while (!eval[k].ok) {
        log(t, EventKind::agent_stalled, team[s]->profile().id.value, "evaluate: " + eval[k].error);
        if (!swap_in(s, t, "evaluate")) {
          scored[k] = false;
          log(t, EventKind::agent_dropped, team[s]->profile().id.value, "evaluate");
          break;
        }
        eval[k] = run_evaluate(*team[s], blinded.candidates, contexts[s], options.agent_timeout_s);
      }
      if (scored[k]) {
        const bool heuristic = std::any_of(eval[k].replies.begin(), eval[k].replies.end(),
                                           [](const agents::EvaluationReply& e) { return e.heuristic; });
        log(t, EventKind::evaluation_received, team[s]->profile().id.value, heuristic ? "heuristic unwrap" : "");
      }
    }

    // Drop evaluators that never returned, together with their proposals.
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (scored[k]) keep.push_back(k);
    }
    if (keep.empty()) throw Error(ErrorCode::AgentFailure, "every evaluator failed in round " + std::to_string(t));

    const std::size_t n = keep.size();
    RoundEntry entry;
    entry.round = t;
    entry.votes = VoteMatrix(t, n);
    VoteMatrix raw_matrix(t, n);
    std::vector<AgentTiming> timing;
    for (std::size_t a = 0; a < n; ++a) {
      const auto k = keep[a];
      entry.proposals.push_back(presented[k]);
      entry.votes.labels.push_back(presented[k].author.value);
      timing.push_back({team[order[k]]->profile().id, gen[order[k]].reply.elapsed_s, eval[k].elapsed_s});
    }
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const double raw = std::clamp(eval[keep[j]].replies[keep[i]].score, 0.0, 100.0);
        raw_matrix.at(j, i) = raw;
        entry.votes.at(j, i) = voting::normalize_score(raw);
      }
    }
    raw_matrix.labels = entry.votes.labels;

    // Phase 4: mask, aggregate, pick the winner.
    entry.votes = voting::apply_diagonal_mask(entry.votes);
    const auto aggregate = voting::quadratic_aggregate(entry.votes);
    for (double s : aggregate) entry.scores.push_back(n > 1 ? s / static_cast<double>(n - 1) : 0.0);
    entry.winner = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (entry.scores[i] > entry.scores[entry.winner] ||
          (entry.scores[i] == entry.scores[entry.winner] &&
           entry.proposals[i].author < entry.proposals[entry.winner].author)) {
        entry.winner = i;
      }
    }

    const Proposal& winner = entry.proposals[entry.winner];
    const bool changed = !state.consensus() || state.consensus()->answer != winner.answer;
    const double delta = consensus::convergence_delta(entry.scores[entry.winner], state.consensus_score(), changed);
    const double gamma = thermo::decay_policy(t, manifest.t_opt, manifest.gamma_base);

    consensus::RoundOutcome outcome;
    outcome.round = t;
    outcome.winner = winner;
    outcome.winner_score = entry.scores[entry.winner];
    outcome.qv_confidence = voting::qv_confidence(raw_matrix, manifest.vote_budget)[entry.winner];
    outcome.delta_magnitude = delta;
    outcome.gamma_t = gamma;

    // Critiques for next round, keyed by author slot; self-critique excluded.
    std::vector<std::vector<std::string>> next_feedback(slots);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const auto& reply = eval[keep[j]].replies[keep[i]];
        char score_text[32];
        std::snprintf(score_text, sizeof score_text, "score %.0f: ", reply.score);
        next_feedback[order[keep[i]]].push_back(score_text + reply.critique);
      }
    }
    feedback = std::move(next_feedback);

    blinded_votes = entry.votes;
    for (std::size_t i = 0; i < n; ++i) blinded_votes->labels[i] = entry.proposals[i].blinded_id;

    double gen_max = 0.0, eval_max = 0.0;
    for (const auto& tm : timing) {
      gen_max = std::max(gen_max, tm.gen_s);
      eval_max = std::max(eval_max, tm.eval_s);
    }
    cumulative_s += gen_max + eval_max + options.overhead_s;

    state = consensus::commit_state(state, entry, gamma);
    record.rounds.push_back(outcome);
    record.timings.push_back(std::move(timing));
    log(t, EventKind::round_committed, winner.author.value, winner.blinded_id);

    if (options.max_latency_s && cumulative_s > *options.max_latency_s) {
      throw Error(ErrorCode::Timeout, "session latency " + std::to_string(cumulative_s) + "s exceeds SLA of " +
                                          std::to_string(*options.max_latency_s) + "s");
    }

    const auto decision = consensus::should_halt(delta, manifest.epsilon, gamma, t, manifest.t_opt);
    if (decision.halt) {
      record.halt_reason = decision.reason;
      log(t, EventKind::halted, "", consensus::to_string(decision.reason));
      break;
    }
  }

  record.history = state.history();
  record.input_buffer = state.input_buffer();
  const auto selection = consensus::select_consensus(record.history, manifest.consensus_strategy);
  record.final_answer = selection.proposal;
  record.final_score = selection.score;
  return record;
}

}  // namespace nsed::orchestrator

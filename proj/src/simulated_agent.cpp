#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nsed/agents.hpp"

namespace nsed::agents {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void validate_sim_params(const SimParams& p) {
  for (double v : {p.p_g, p.p_v, p.fp_rate, p.adopt_rate, p.adopt_threshold, p.repulsion}) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::OutOfRange, "simulation probabilities must lie in [0,1]");
  }
  if (p.fatigue_kappa < 0.0) throw Error(ErrorCode::OutOfRange, "fatigue_kappa must be >= 0");
  if (p.latency_mean_s < 0.0 || p.latency_jitter_s < 0.0) throw Error(ErrorCode::OutOfRange, "latency must be >= 0");
  if (p.wrong_answers < 1) throw Error(ErrorCode::OutOfRange, "wrong_answers must be >= 1");
}

SimulatedAgent::SimulatedAgent(AgentProfile profile, SimParams params)
    : profile_(std::move(profile)),
      params_(params),
      rng_(mix_seed(params.seed, 1)),
      latency_rng_(mix_seed(params.seed, 2)) {
  validate_sim_params(params_);
}

double SimulatedAgent::uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

double SimulatedAgent::latency() {
  const double u = static_cast<double>(latency_rng_() >> 11) * 0x1.0p-53;
  return std::max(1e-3, params_.latency_mean_s + params_.latency_jitter_s * (2.0 * u - 1.0));
}

std::string SimulatedAgent::fresh_answer() {
  if (uniform() < params_.p_g) return kCorrectAnswer;
  const auto k = static_cast<int>(uniform() * params_.wrong_answers);
  return "W" + std::to_string(std::min(k, params_.wrong_answers - 1));
}

GenerationReply SimulatedAgent::generate(const ContextPacket& context) {
  std::set<std::string> in_context;
  if (context.consensus) in_context.insert(context.consensus->answer);
  if (context.retained) in_context.insert(context.retained->answer);
  for (const auto& w : context.recent_winners) in_context.insert(w.candidate.answer);

  std::string answer;
  bool adopted = false;
  if (context.consensus && context.consensus_score >= params_.adopt_threshold && uniform() < params_.adopt_rate) {
    answer = context.consensus->answer;
    adopted = true;
  } else {
    answer = fresh_answer();
  }
  // Presence penalty analog: anything already in context may be abandoned.
  bool repelled = false;
  if (in_context.count(answer) && uniform() < params_.repulsion) {
    answer = fresh_answer();
    repelled = true;
  }

  GenerationReply reply;
  reply.answer = answer;
  std::ostringstream reasoning;
  reasoning << "round " << context.round << ": " << (adopted ? "refined consensus" : "independent derivation")
            << (repelled ? ", re-derived after repulsion" : "");
  reply.reasoning = reasoning.str();
  reply.elapsed_s = latency();
  return reply;
}

EvaluationReply SimulatedAgent::evaluate(const CandidateView& candidate, const ContextPacket& context) {
  const bool correct = candidate.answer == kCorrectAnswer;
  const bool high = uniform() < (correct ? params_.p_v : params_.fp_rate);
  double score = high ? 70.0 + 30.0 * uniform() : 30.0 * uniform();
  if (params_.fatigue_kappa > 0.0) {
    const double t = context.round;
    score += params_.fatigue_kappa * t * t * noise_(rng_);
  }
  EvaluationReply reply;
  reply.score = std::clamp(score, 0.0, 100.0);
  reply.critique = high ? "holds up under verification" : "verification found a flaw";
  reply.elapsed_s = latency();
  return reply;
}

}  // namespace nsed::agents

#include "nsed/json_io.hpp"

#include <fstream>
#include <sstream>

namespace nsed {

using nlohmann::json;

namespace {

template <class T>
void get_if_present(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& value) {
  j[key] = value ? json(*value) : json(nullptr);
}

template <class T>
void get_optional(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) {
    out = j.at(key).get<T>();
  } else {
    out.reset();
  }
}

}  // namespace

void to_json(json& j, const AgentId& v) { j = v.value; }
void from_json(const json& j, AgentId& v) { v.value = j.get<std::string>(); }

void to_json(json& j, const AgentProfile& v) {
  j = {{"id", v.id},
       {"domain_tags", v.domain_tags},
       {"price_per_token", v.price_per_token},
       {"mean_latency_s", v.mean_latency_s},
       {"quality_prior", v.quality_prior},
       {"gen_precision", v.gen_precision},
       {"ver_precision", v.ver_precision},
       {"halluc_rate", v.halluc_rate}};
}

void from_json(const json& j, AgentProfile& v) {
  v = AgentProfile{};
  j.at("id").get_to(v.id);
  get_if_present(j, "domain_tags", v.domain_tags);
  get_if_present(j, "price_per_token", v.price_per_token);
  get_if_present(j, "mean_latency_s", v.mean_latency_s);
  get_if_present(j, "quality_prior", v.quality_prior);
  get_if_present(j, "gen_precision", v.gen_precision);
  get_if_present(j, "ver_precision", v.ver_precision);
  get_if_present(j, "halluc_rate", v.halluc_rate);
}

void to_json(json& j, const Sla& v) {
  j = {{"max_latency_s", v.max_latency_s},
       {"max_cost", v.max_cost},
       {"min_quality", v.min_quality},
       {"elasticity", v.elasticity}};
}

void from_json(const json& j, Sla& v) {
  v = Sla{};
  j.at("max_latency_s").get_to(v.max_latency_s);
  j.at("max_cost").get_to(v.max_cost);
  get_if_present(j, "min_quality", v.min_quality);
  get_if_present(j, "elasticity", v.elasticity);
}

void to_json(json& j, const Proposal& v) {
  j = {{"round", v.round},
       {"author", v.author},
       {"blinded_id", v.blinded_id},
       {"reasoning", v.reasoning},
       {"answer", v.answer}};
}

void from_json(const json& j, Proposal& v) {
  v = Proposal{};
  get_if_present(j, "round", v.round);
  get_if_present(j, "author", v.author);
  get_if_present(j, "blinded_id", v.blinded_id);
  get_if_present(j, "reasoning", v.reasoning);
  get_if_present(j, "answer", v.answer);
}

void to_json(json& j, const VoteMatrix& v) {
  json rows = json::array();
  for (std::size_t r = 0; r < v.size; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < v.size; ++c) row.push_back(v.at(r, c));
    rows.push_back(std::move(row));
  }
  j = {{"round", v.round}, {"labels", v.labels}, {"entries", std::move(rows)}};
}

void from_json(const json& j, VoteMatrix& v) {
  const auto& rows = j.at("entries");
  v = VoteMatrix(j.value("round", 0), rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.size()) throw Error(ErrorCode::NonSquareMatrix, "vote matrix rows must be square");
    for (std::size_t c = 0; c < rows.size(); ++c) v.at(r, c) = rows[r][c].get<double>();
  }
  get_if_present(j, "labels", v.labels);
}

void to_json(json& j, const TemporalKernel& v) {
  j = {{"kind", to_string(v.kind)}, {"parameter", v.parameter}};
}

void from_json(const json& j, TemporalKernel& v) {
  v = TemporalKernel{};
  if (j.is_string()) {
    v.kind = kernel_kind_from_string(j.get<std::string>());
    return;
  }
  v.kind = kernel_kind_from_string(j.at("kind").get<std::string>());
  get_if_present(j, "parameter", v.parameter);
}

void to_json(json& j, const ThermoParams& v) {
  j = {{"p_g", v.p_g},
       {"p_v", v.p_v},
       {"efficiency", v.efficiency},
       {"fatigue", v.fatigue},
       {"r_squared", v.r_squared},
       {"r_squared_excl_first", v.r_squared_excl_first},
       {"t_opt", v.t_opt}};
}

void from_json(const json& j, ThermoParams& v) {
  v = ThermoParams{};
  j.at("p_g").get_to(v.p_g);
  j.at("p_v").get_to(v.p_v);
  j.at("efficiency").get_to(v.efficiency);
  j.at("fatigue").get_to(v.fatigue);
  get_if_present(j, "r_squared", v.r_squared);
  get_if_present(j, "r_squared_excl_first", v.r_squared_excl_first);
  get_if_present(j, "t_opt", v.t_opt);
}

void to_json(json& j, const SessionManifest& v) {
  j = {{"session_id", v.session_id},
       {"agents", v.agents},
       {"t_opt", v.t_opt},
       {"gamma_base", v.gamma_base},
       {"epsilon", v.epsilon},
       {"consensus_strategy", v.consensus_strategy},
       {"vote_budget", v.vote_budget},
       {"seed", v.seed}};
}

void from_json(const json& j, SessionManifest& v) {
  v = SessionManifest{};
  get_if_present(j, "session_id", v.session_id);
  j.at("agents").get_to(v.agents);
  j.at("t_opt").get_to(v.t_opt);
  get_if_present(j, "gamma_base", v.gamma_base);
  get_if_present(j, "epsilon", v.epsilon);
  get_if_present(j, "consensus_strategy", v.consensus_strategy);
  get_if_present(j, "vote_budget", v.vote_budget);
  get_if_present(j, "seed", v.seed);
}

void to_json(json& j, const RoundEntry& v) {
  j = {{"round", v.round}, {"proposals", v.proposals}, {"votes", v.votes}, {"scores", v.scores}, {"winner", v.winner}};
}

void from_json(const json& j, RoundEntry& v) {
  v = RoundEntry{};
  j.at("round").get_to(v.round);
  j.at("proposals").get_to(v.proposals);
  j.at("votes").get_to(v.votes);
  j.at("scores").get_to(v.scores);
  j.at("winner").get_to(v.winner);
}

void to_json(json& j, const HistorySummary& v) {
  j = {{"round", v.round}, {"winner_blinded_id", v.winner_blinded_id}, {"score", v.score}, {"digest", v.digest}};
}

void from_json(const json& j, HistorySummary& v) {
  v = HistorySummary{};
  j.at("round").get_to(v.round);
  j.at("winner_blinded_id").get_to(v.winner_blinded_id);
  j.at("score").get_to(v.score);
  get_if_present(j, "digest", v.digest);
}

void to_json(json& j, const DeliberationState& v) {
  j = {{"input_buffer", v.input_buffer()},
       {"consensus_score", v.consensus_score()},
       {"history", v.history()},
       {"summaries", v.summaries()},
       {"active_window", v.active_window()}};
  put_optional(j, "consensus", v.consensus());
  put_optional(j, "retained", v.retained());
}

namespace consensus {

void to_json(json& j, const HaltReason& v) { j = to_string(v); }
void from_json(const json& j, HaltReason& v) { v = halt_reason_from_string(j.get<std::string>()); }

void to_json(json& j, const RoundOutcome& v) {
  j = {{"round", v.round},
       {"winner", v.winner},
       {"winner_score", v.winner_score},
       {"qv_confidence", v.qv_confidence},
       {"delta_magnitude", v.delta_magnitude},
       {"gamma_t", v.gamma_t}};
}

void from_json(const json& j, RoundOutcome& v) {
  v = RoundOutcome{};
  j.at("round").get_to(v.round);
  j.at("winner").get_to(v.winner);
  j.at("winner_score").get_to(v.winner_score);
  get_if_present(j, "qv_confidence", v.qv_confidence);
  get_if_present(j, "delta_magnitude", v.delta_magnitude);
  get_if_present(j, "gamma_t", v.gamma_t);
}

}  // namespace consensus

namespace thermo {

void to_json(json& j, const TrajectoryPoint& v) { j = {{"round", v.round}, {"accuracy", v.accuracy}}; }
void from_json(const json& j, TrajectoryPoint& v) {
  j.at("round").get_to(v.round);
  j.at("accuracy").get_to(v.accuracy);
}

}  // namespace thermo

namespace broker {

void to_json(json& j, const TaskProfile& v) {
  j = {{"description", v.description},
       {"domain_tags", v.domain_tags},
       {"est_tokens_per_round", v.est_tokens_per_round},
       {"complexity_hint", to_string(v.complexity_hint)}};
}

void from_json(const json& j, TaskProfile& v) {
  v = TaskProfile{};
  get_if_present(j, "description", v.description);
  get_if_present(j, "domain_tags", v.domain_tags);
  get_if_present(j, "est_tokens_per_round", v.est_tokens_per_round);
  if (j.contains("complexity_hint")) v.complexity_hint = complexity_from_string(j.at("complexity_hint").get<std::string>());
}

void to_json(json& j, const CompositionSolution& v) {
  j = {{"members", v.members},
       {"t", v.t},
       {"predicted_utility", v.predicted_utility},
       {"predicted_cost", v.predicted_cost},
       {"predicted_latency_s", v.predicted_latency_s},
       {"mean_quality", v.mean_quality},
       {"mean_ver_precision", v.mean_ver_precision},
       {"objective", v.objective}};
}

void from_json(const json& j, CompositionSolution& v) {
  v = CompositionSolution{};
  j.at("members").get_to(v.members);
  j.at("t").get_to(v.t);
  get_if_present(j, "predicted_utility", v.predicted_utility);
  get_if_present(j, "predicted_cost", v.predicted_cost);
  get_if_present(j, "predicted_latency_s", v.predicted_latency_s);
  get_if_present(j, "mean_quality", v.mean_quality);
  get_if_present(j, "mean_ver_precision", v.mean_ver_precision);
  get_if_present(j, "objective", v.objective);
}

}  // namespace broker

namespace agents {

void to_json(json& j, const CandidateView& v) {
  j = {{"blinded_id", v.blinded_id}, {"reasoning", v.reasoning}, {"answer", v.answer}};
}

void from_json(const json& j, CandidateView& v) {
  v = CandidateView{};
  j.at("blinded_id").get_to(v.blinded_id);
  get_if_present(j, "reasoning", v.reasoning);
  get_if_present(j, "answer", v.answer);
}

void to_json(json& j, const RecentWinner& v) {
  j = {{"round", v.round}, {"candidate", v.candidate}, {"score", v.score}};
}

void to_json(json& j, const ContextPacket& v) {
  j = {{"round", v.round},
       {"input_buffer", v.input_buffer},
       {"consensus_score", v.consensus_score},
       {"recent_winners", v.recent_winners},
       {"summaries", v.summaries},
       {"critiques", v.critiques},
       {"controversy", v.controversy}};
  put_optional(j, "consensus", v.consensus);
  put_optional(j, "retained", v.retained);
  put_optional(j, "previous_votes", v.previous_votes);
}

void to_json(json& j, const SimParams& v) {
  j = {{"p_g", v.p_g},
       {"p_v", v.p_v},
       {"fp_rate", v.fp_rate},
       {"adopt_rate", v.adopt_rate},
       {"adopt_threshold", v.adopt_threshold},
       {"fatigue_kappa", v.fatigue_kappa},
       {"repulsion", v.repulsion},
       {"latency_mean_s", v.latency_mean_s},
       {"latency_jitter_s", v.latency_jitter_s},
       {"wrong_answers", v.wrong_answers},
       {"seed", v.seed}};
}

void from_json(const json& j, SimParams& v) {
  v = SimParams{};
  get_if_present(j, "p_g", v.p_g);
  get_if_present(j, "p_v", v.p_v);
  get_if_present(j, "fp_rate", v.fp_rate);
  get_if_present(j, "adopt_rate", v.adopt_rate);
  get_if_present(j, "adopt_threshold", v.adopt_threshold);
  get_if_present(j, "fatigue_kappa", v.fatigue_kappa);
  get_if_present(j, "repulsion", v.repulsion);
  get_if_present(j, "latency_mean_s", v.latency_mean_s);
  get_if_present(j, "latency_jitter_s", v.latency_jitter_s);
  get_if_present(j, "wrong_answers", v.wrong_answers);
  get_if_present(j, "seed", v.seed);
}

void to_json(json& j, const RemoteParams& v) {
  j = {{"endpoint", v.endpoint},
       {"model", v.model},
       {"persona", v.persona},
       {"temperature", v.temperature},
       {"presence_penalty", v.presence_penalty},
       {"max_tokens", v.max_tokens},
       {"timeout_s", v.timeout_s},
       {"api_key_env", v.api_key_env}};
}

void from_json(const json& j, RemoteParams& v) {
  v = RemoteParams{};
  j.at("endpoint").get_to(v.endpoint);
  j.at("model").get_to(v.model);
  get_if_present(j, "persona", v.persona);
  get_if_present(j, "temperature", v.temperature);
  get_if_present(j, "presence_penalty", v.presence_penalty);
  get_if_present(j, "max_tokens", v.max_tokens);
  get_if_present(j, "timeout_s", v.timeout_s);
  get_if_present(j, "api_key_env", v.api_key_env);
}

void to_json(json& j, const AgentBinding& v) {
  j = v.profile;
  json backend;
  if (const auto* sim = std::get_if<SimParams>(&v.backend)) {
    backend = *sim;
    backend["type"] = "simulated";
  } else {
    backend = std::get<RemoteParams>(v.backend);
    backend["type"] = "remote";
  }
  j["backend"] = std::move(backend);
}

void from_json(const json& j, AgentBinding& v) {
  v.profile = j.get<AgentProfile>();
  const auto& backend = j.at("backend");
  const auto type = backend.value("type", std::string("simulated"));
  if (type == "simulated") {
    v.backend = backend.get<SimParams>();
  } else if (type == "remote") {
    auto remote = backend.get<RemoteParams>();
    if (remote.temperature < 0.0 || remote.presence_penalty < 0.0) {
      throw Error(ErrorCode::ConfigError, "remote temperature and presence_penalty must be >= 0");
    }
    v.backend = std::move(remote);
  } else {
    throw Error(ErrorCode::ConfigError, "unknown backend type '" + type + "'");
  }
}

}  // namespace agents

namespace orchestrator {

void to_json(json& j, const Event& v) {
  j = {{"round", v.round}, {"kind", to_string(v.kind)}, {"agent", v.agent}, {"detail", v.detail}};
}

void from_json(const json& j, Event& v) {
  j.at("round").get_to(v.round);
  v.kind = event_kind_from_string(j.at("kind").get<std::string>());
  get_if_present(j, "agent", v.agent);
  get_if_present(j, "detail", v.detail);
}

void to_json(json& j, const AgentTiming& v) { j = {{"agent", v.agent}, {"gen_s", v.gen_s}, {"eval_s", v.eval_s}}; }

void from_json(const json& j, AgentTiming& v) {
  j.at("agent").get_to(v.agent);
  j.at("gen_s").get_to(v.gen_s);
  j.at("eval_s").get_to(v.eval_s);
}

void to_json(json& j, const SwapEvent& v) {
  j = {{"round", v.round}, {"phase", v.phase}, {"stalled", v.stalled}, {"replacement", v.replacement}};
}

void from_json(const json& j, SwapEvent& v) {
  j.at("round").get_to(v.round);
  j.at("phase").get_to(v.phase);
  j.at("stalled").get_to(v.stalled);
  j.at("replacement").get_to(v.replacement);
}

void to_json(json& j, const SessionRecord& v) {
  j = {{"manifest", v.manifest},
       {"input_buffer", v.input_buffer},
       {"rounds", v.rounds},
       {"history", v.history},
       {"timings", v.timings},
       {"final_answer", v.final_answer},
       {"final_score", v.final_score},
       {"halt_reason", v.halt_reason},
       {"swaps", v.swaps},
       {"events", v.events}};
}

void from_json(const json& j, SessionRecord& v) {
  v = SessionRecord{};
  j.at("manifest").get_to(v.manifest);
  get_if_present(j, "input_buffer", v.input_buffer);
  j.at("rounds").get_to(v.rounds);
  j.at("history").get_to(v.history);
  get_if_present(j, "timings", v.timings);
  j.at("final_answer").get_to(v.final_answer);
  get_if_present(j, "final_score", v.final_score);
  j.at("halt_reason").get_to(v.halt_reason);
  get_if_present(j, "swaps", v.swaps);
  get_if_present(j, "events", v.events);
}

}  // namespace orchestrator

namespace telemetry {

void to_json(json& j, const RoundLatency& v) {
  j = {{"round", v.round},
       {"gen_s", v.gen_s},
       {"eval_s", v.eval_s},
       {"total_s", v.total_s},
       {"cumulative_s", v.cumulative_s}};
}

void from_json(const json& j, RoundLatency& v) {
  j.at("round").get_to(v.round);
  j.at("gen_s").get_to(v.gen_s);
  j.at("eval_s").get_to(v.eval_s);
  j.at("total_s").get_to(v.total_s);
  j.at("cumulative_s").get_to(v.cumulative_s);
}

void to_json(json& j, const InfluenceReport& v) {
  j = {{"session_id", v.session_id},
       {"ensemble", v.ensemble},
       {"agents", v.agents},
       {"influence", v.influence},
       {"influence_score", v.influence_score},
       {"vote_share", v.vote_share},
       {"wins", v.wins},
       {"latency", v.latency},
       {"halt_reason", v.halt_reason},
       {"rounds", v.rounds},
       {"swaps", v.swaps}};
  put_optional(j, "convergence_round", v.convergence_round);
}

void from_json(const json& j, InfluenceReport& v) {
  v = InfluenceReport{};
  j.at("session_id").get_to(v.session_id);
  get_if_present(j, "ensemble", v.ensemble);
  j.at("agents").get_to(v.agents);
  j.at("influence").get_to(v.influence);
  j.at("influence_score").get_to(v.influence_score);
  j.at("vote_share").get_to(v.vote_share);
  get_if_present(j, "wins", v.wins);
  get_if_present(j, "latency", v.latency);
  get_optional(j, "convergence_round", v.convergence_round);
  get_if_present(j, "halt_reason", v.halt_reason);
  get_if_present(j, "rounds", v.rounds);
  get_if_present(j, "swaps", v.swaps);
}

}  // namespace telemetry

namespace json_io {

json read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const json& value, int indent) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << value.dump(indent) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace json_io

}  // namespace nsed

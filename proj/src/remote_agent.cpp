#include <chrono>
#include <cstdlib>
#include <sstream>

#include <httplib.h>

#include "nsed/agents.hpp"
#include "nsed/tool_calls.hpp"

namespace nsed::agents {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string base_path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::ConfigError, "endpoint needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  e.base_path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
  return e;
}

constexpr const char* kProtocolBrief =
    "You are one expert in an anonymous panel. Each round you propose an answer with submit_proposal and "
    "score peer candidates with submit_evaluation. Be a harsh grader: reward only verifiably correct work. "
    "You may keep notes with update_scratchpad.";

}  // namespace

std::string render_context(const ContextPacket& packet) {
  std::ostringstream out;
  out << "## Round " << packet.round << "\n\n## Task and constraints\n";
  for (const auto& line : packet.input_buffer) out << "- " << line << "\n";
  if (packet.consensus) {
    out << "\n## Current consensus (score " << packet.consensus_score << ", id " << packet.consensus->blinded_id
        << ")\n"
        << packet.consensus->reasoning << "\nAnswer: " << packet.consensus->answer << "\n";
  }
  if (packet.retained) {
    out << "\n## Previous consensus (id " << packet.retained->blinded_id << ")\n"
        << packet.retained->reasoning << "\nAnswer: " << packet.retained->answer << "\n";
  }
  if (!packet.recent_winners.empty()) {
    out << "\n## Recent round winners\n";
    for (const auto& w : packet.recent_winners) {
      out << "- round " << w.round << " [" << w.candidate.blinded_id << "] score " << w.score << ": "
          << w.candidate.answer << "\n";
    }
  }
  if (!packet.summaries.empty()) {
    out << "\n## Earlier rounds (summaries)\n";
    for (const auto& s : packet.summaries) {
      out << "- round " << s.round << " [" << s.winner_blinded_id << "] score " << s.score << ": " << s.digest << "\n";
    }
  }
  if (!packet.critiques.empty()) {
    out << "\n## Critiques of your last proposal\n";
    for (const auto& c : packet.critiques) out << "- " << c << "\n";
  }
  if (packet.previous_votes) {
    const auto& v = *packet.previous_votes;
    out << "\n## Previous vote matrix (rows: evaluator, columns: candidate)\n";
    for (std::size_t i = 0; i < v.size; ++i) out << (i ? "," : "") << (i < v.labels.size() ? v.labels[i] : "");
    out << "\n";
    for (std::size_t j = 0; j < v.size; ++j) {
      for (std::size_t i = 0; i < v.size; ++i) out << (i ? "," : "") << v.at(j, i);
      out << "\n";
    }
    out << "Controversy per candidate:";
    for (double c : packet.controversy) out << " " << c;
    out << "\n";
  }
  return out.str();
}

RemoteAgent::RemoteAgent(AgentProfile profile, RemoteParams params)
    : profile_(std::move(profile)), params_(std::move(params)) {
  if (params_.temperature < 0.0 || params_.presence_penalty < 0.0) {
    throw Error(ErrorCode::ConfigError, "temperature and presence_penalty must be >= 0");
  }
  split_endpoint(params_.endpoint);
}

json RemoteAgent::complete(const std::string& instruction, const std::string& tool_name) const {
  const auto endpoint = split_endpoint(params_.endpoint);
  std::string system = params_.persona.empty() ? kProtocolBrief : params_.persona + "\n\n" + kProtocolBrief;
  if (!scratchpad_.empty()) system += "\n\nYour scratchpad:\n" + scratchpad_;

  const json body = {
      {"model", params_.model},
      {"messages", json::array({{{"role", "system"}, {"content", system}}, {{"role", "user"}, {"content", instruction}}})},
      {"tools", protocol_tool_schemas()},
      {"tool_choice", {{"type", "function"}, {"function", {{"name", tool_name}}}}},
      {"temperature", params_.temperature},
      {"presence_penalty", params_.presence_penalty},
      {"max_tokens", params_.max_tokens}};

  httplib::Client client(endpoint.origin);
  const auto seconds = static_cast<time_t>(params_.timeout_s);
  const auto micros = static_cast<time_t>((params_.timeout_s - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  httplib::Headers headers;
  if (const char* key = std::getenv(params_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const auto result = client.Post(endpoint.base_path + "/chat/completions", headers, body.dump(), "application/json");
  if (!result) {
    const auto err = result.error();
    const auto code = err == httplib::Error::ConnectionTimeout ? ErrorCode::Timeout : ErrorCode::HttpError;
    throw Error(code, params_.endpoint + ": " + httplib::to_string(err));
  }
  if (result->status != 200) {
    throw Error(ErrorCode::HttpError, params_.endpoint + ": status " + std::to_string(result->status));
  }
  auto parsed = json::parse(result->body, nullptr, false);
  if (parsed.is_discarded()) throw Error(ErrorCode::MalformedOutput, "response body is not JSON");
  return parsed;
}

void RemoteAgent::absorb_side_calls(const std::vector<ToolInvocation>& calls) {
  for (const auto& call : calls) {
    if (call.name != kUpdateScratchpad) continue;
    const auto content = call.arguments.value("content", std::string());
    if (call.arguments.value("strategy", std::string("append")) == "overwrite") {
      scratchpad_ = content;
    } else {
      if (!scratchpad_.empty()) scratchpad_ += "\n";
      scratchpad_ += content;
    }
  }
}

GenerationReply RemoteAgent::generate(const ContextPacket& context) {
  const auto start = std::chrono::steady_clock::now();
  const auto response = complete(render_context(context) + "\nSubmit your proposal with submit_proposal.", kSubmitProposal);
  const auto parsed = extract_invocation(response, kSubmitProposal);
  absorb_side_calls(parsed.side_calls);

  const auto& args = parsed.call.arguments;
  if (!args.contains("final_answer") || !args["final_answer"].is_string()) {
    throw Error(ErrorCode::MalformedOutput, "submit_proposal without a final_answer string");
  }
  GenerationReply reply;
  reply.answer = args["final_answer"].get<std::string>();
  reply.reasoning = args.contains("reasoning") && args["reasoning"].is_string() ? args["reasoning"].get<std::string>() : "";
  reply.heuristic = parsed.heuristic;
  reply.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return reply;
}

EvaluationReply RemoteAgent::evaluate(const CandidateView& candidate, const ContextPacket& context) {
  const auto start = std::chrono::steady_clock::now();
  std::ostringstream instruction;
  instruction << render_context(context) << "\n## Candidate " << candidate.blinded_id << "\n"
              << candidate.reasoning << "\nAnswer: " << candidate.answer
              << "\n\nScore this candidate from 0 to 100 with submit_evaluation (target_id " << candidate.blinded_id
              << ").";
  const auto response = complete(instruction.str(), kSubmitEvaluation);
  const auto parsed = extract_invocation(response, kSubmitEvaluation);
  absorb_side_calls(parsed.side_calls);

  const auto& args = parsed.call.arguments;
  double score = 0.0;
  if (args.contains("score") && args["score"].is_number()) {
    score = args["score"].get<double>();
  } else if (args.contains("score") && args["score"].is_string()) {
    try {
      score = std::stod(args["score"].get<std::string>());
    } catch (const std::exception&) {
      throw Error(ErrorCode::MalformedOutput, "submit_evaluation score is not numeric");
    }
  } else {
    throw Error(ErrorCode::MalformedOutput, "submit_evaluation without a score");
  }
  EvaluationReply reply;
  reply.clamped = score < 0.0 || score > 100.0;
  reply.score = std::clamp(score, 0.0, 100.0);
  reply.critique = args.contains("critique") && args["critique"].is_string() ? args["critique"].get<std::string>() : "";
  reply.heuristic = parsed.heuristic;
  reply.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return reply;
}

}  // namespace nsed::agents

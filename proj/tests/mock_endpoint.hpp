#pragma once

#include <httplib.h>

#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nsed/agents.hpp"
#include "nsed/tool_calls.hpp"
#include "support.hpp"

namespace test_support {

using nlohmann::json;
using nsed::agents::RemoteParams;
using nsed::agents::kSubmitEvaluation;
using nsed::agents::kSubmitProposal;


inline std::string fixture(const std::string& name) {
  std::ifstream in(data_dir() / "wire" / name);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline json text_response(const std::string& content) {
  return {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
}

inline json native_call(const std::string& name, const json& arguments) {
  return {{"choices",
           json::array({{{"message",
                          {{"role", "assistant"},
                           {"content", nullptr},
                           {"tool_calls", json::array({{{"id", "call"},
                                                        {"type", "function"},
                                                        {"function", {{"name", name}, {"arguments", arguments.dump()}}}}})}}}}})}};
}

inline std::string last_candidate_answer(const std::string& prompt) {
  const auto at = prompt.rfind("\nAnswer: ");
  if (at == std::string::npos) return {};
  const auto start = at + 9;
  return prompt.substr(start, prompt.find('\n', start) - start);
}

// Scripted chat-completions endpoint. The model name selects the behaviour:
//   native / text / prose : wire fixtures
//   status500             : server error
//   panel-<X>             : proposes X natively; scores "B" at 90, others at 20
//   panel-text-<X>        : same, but every call is embedded in text
//   score-<S>             : evaluation score sent as the JSON value S
class MockEndpoint {
 public:
  MockEndpoint() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      {
        std::lock_guard lock(mutex_);
        requests.push_back(body);
        authorization.push_back(req.get_header_value("Authorization"));
      }
      const auto model = body.at("model").get<std::string>();
      const auto tool = body.at("tool_choice").at("function").at("name").get<std::string>();
      const bool proposing = tool == kSubmitProposal;
      const auto prompt = body.at("messages").back().at("content").get<std::string>();
      json reply;
      if (model == "status500") {
        res.status = 500;
        res.set_content("boom", "text/plain");
        return;
      } else if (model == "native") {
        reply = json::parse(fixture(proposing ? "native_proposal.json" : "native_evaluation.json"));
      } else if (model == "text") {
        reply = text_response(fixture(proposing ? "text_proposal_tagged.txt" : "text_evaluation.txt"));
      } else if (model == "prose") {
        reply = text_response(fixture("malformed_prose.txt"));
      } else if (model.rfind("score-", 0) == 0) {
        reply = native_call(kSubmitEvaluation,
                            {{"target_id", "x"}, {"score", json::parse(model.substr(6))}, {"critique", "c"}});
      } else if (model.rfind("panel-", 0) == 0) {
        const bool as_text = model.rfind("panel-text-", 0) == 0;
        const auto answer = model.substr(as_text ? 11 : 6);
        const json args = proposing ? json{{"reasoning", "derived " + answer}, {"final_answer", answer}}
                                    : json{{"target_id", "x"},
                                           {"score", last_candidate_answer(prompt) == "B" ? 90 : 20},
                                           {"critique", "checked"}};
        if (as_text) {
          reply = text_response("Calling now.\n<tool_call>\n" + json{{"name", tool}, {"arguments", args}}.dump() +
                                "\n</tool_call>");
        } else {
          reply = native_call(tool, args);
        }
      }
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  std::vector<json> requests;
  std::vector<std::string> authorization;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mutex_;
};

inline RemoteParams params_for(const MockEndpoint& mock, const std::string& model) {
  RemoteParams p;
  p.endpoint = mock.url();
  p.model = model;
  p.persona = "You are a careful mathematician.";
  p.timeout_s = 5.0;
  p.api_key_env = "NSED_TEST_REMOTE_KEY";
  return p;
}

inline int unused_port() {
  httplib::Server probe;
  const int port = probe.bind_to_any_port("127.0.0.1");
  probe.stop();
  return port;
}

}  // namespace test_support

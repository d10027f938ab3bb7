#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "nsed/agents.hpp"
#include "nsed/json_io.hpp"
#include "nsed/orchestrator.hpp"

namespace test_support {

inline std::filesystem::path data_dir() { return NSED_TEST_DATA_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("nsed_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline nsed::AgentProfile profile(const std::string& id, double p_g = 0.6, double p_v = 0.7) {
  nsed::AgentProfile p;
  p.id = {id};
  p.gen_precision = p_g;
  p.ver_precision = p_v;
  p.quality_prior = 0.5;
  p.price_per_token = 1e-6;
  p.mean_latency_s = 1.0;
  return p;
}

// Independent restatement of the utility curve, used as an oracle.
inline double oracle_utility(double t, double p_g, double p_v, double efficiency, double fatigue) {
  return 1.0 - (1.0 - p_g) * std::exp(-efficiency * (p_v - p_g) * (t - 1.0)) - fatigue * (t - 1.0) * (t - 1.0);
}

struct PhaseFixture {
  double overhead_s = 0.0;
  std::vector<std::vector<nsed::orchestrator::AgentTiming>> rounds;
  std::vector<double> expected_total_s;
  double expected_cumulative_s = 0.0;
};

inline PhaseFixture load_phase_fixture() {
  const auto j = nsed::json_io::read_file(data_dir() / "phase_times_reference.json");
  PhaseFixture f;
  f.overhead_s = j.at("overhead_s").get<double>();
  f.expected_total_s = j.at("expected_total_s").get<std::vector<double>>();
  f.expected_cumulative_s = j.at("expected_cumulative_s").get<double>();
  for (const auto& round : j.at("rounds")) f.rounds.push_back(round.get<std::vector<nsed::orchestrator::AgentTiming>>());
  return f;
}

/// Deterministic agent: always proposes `answer`, scores candidates from a
/// table keyed by answer text (default score otherwise), and records every
/// packet and candidate it is shown.
class ScriptedAgent : public nsed::agents::Agent {
 public:
  ScriptedAgent(nsed::AgentProfile p, std::string answer, std::map<std::string, double> scores = {},
                double default_score = 10.0)
      : profile_(std::move(p)), answer_(std::move(answer)), scores_(std::move(scores)), default_(default_score) {}

  const nsed::AgentProfile& profile() const override { return profile_; }

  nsed::agents::GenerationReply generate(const nsed::agents::ContextPacket& ctx) override {
    std::lock_guard lock(mutex_);
    packets.push_back(ctx);
    if (fail_generate) throw nsed::Error(nsed::ErrorCode::Timeout, "scripted stall");
    return {"because " + answer_, answer_, gen_elapsed_s, false};
  }

  nsed::agents::EvaluationReply evaluate(const nsed::agents::CandidateView& c,
                                         const nsed::agents::ContextPacket&) override {
    std::lock_guard lock(mutex_);
    seen.push_back(c);
    if (fail_evaluate) throw nsed::Error(nsed::ErrorCode::Timeout, "scripted stall");
    const auto it = scores_.find(c.answer);
    return {it == scores_.end() ? default_ : it->second, "critique of " + c.blinded_id, eval_elapsed_s, false, false};
  }

  bool fail_generate = false;
  bool fail_evaluate = false;
  double gen_elapsed_s = 1.0;
  double eval_elapsed_s = 0.5;
  std::vector<nsed::agents::ContextPacket> packets;
  std::vector<nsed::agents::CandidateView> seen;

 private:
  nsed::AgentProfile profile_;
  std::string answer_;
  std::map<std::string, double> scores_;
  double default_;
  std::mutex mutex_;
};

}  // namespace test_support

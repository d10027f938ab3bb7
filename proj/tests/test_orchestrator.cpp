#include <doctest.h>

#include <regex>
#include <thread>

#include "nsed/orchestrator.hpp"
#include "nsed/voting.hpp"
#include "support.hpp"

using namespace nsed;
using namespace nsed::orchestrator;
using test_support::ScriptedAgent;

namespace {

struct Panel {
  std::vector<std::unique_ptr<agents::Agent>> team;
  std::vector<ScriptedAgent*> agents;
  ReservePool reserves;
  SessionManifest manifest;

  ScriptedAgent& add(const std::string& id, const std::string& answer, std::map<std::string, double> scores = {},
                     double p_g = 0.6, double p_v = 0.7) {
    auto agent = std::make_unique<ScriptedAgent>(test_support::profile(id, p_g, p_v), answer, std::move(scores));
    agents.push_back(agent.get());
    manifest.agents.push_back({id});
    team.push_back(std::move(agent));
    return *agents.back();
  }

  ScriptedAgent& add_reserve(const std::string& id, const std::string& answer, double p_g = 0.6, double p_v = 0.7) {
    auto agent = std::make_unique<ScriptedAgent>(test_support::profile(id, p_g, p_v), answer);
    auto* raw = agent.get();
    reserves.add(std::move(agent));
    return *raw;
  }

  SessionRecord run(const RunOptions& options = {}) { return run_deliberation("task", manifest, team, reserves, options); }
};

Panel three_way(int t_opt = 3, double epsilon = 0.02) {
  Panel p;
  p.manifest.session_id = "test";
  p.manifest.t_opt = t_opt;
  p.manifest.epsilon = epsilon;
  p.manifest.seed = 99;
  p.add("a", "A", {{"B", 90}});
  p.add("b", "B");
  p.add("c", "C", {{"B", 80}});
  return p;
}

// Records the global order in which generate/evaluate calls arrive.
class TracingAgent : public agents::Agent {
 public:
  TracingAgent(std::string id, std::vector<std::string>& trace, std::mutex& mutex)
      : profile_(test_support::profile(id)), trace_(trace), mutex_(mutex) {}

  const AgentProfile& profile() const override { return profile_; }

  agents::GenerationReply generate(const agents::ContextPacket& ctx) override {
    std::this_thread::sleep_for(std::chrono::milliseconds(5 * (profile_.id.value[0] - 'a')));
    std::lock_guard lock(mutex_);
    trace_.push_back("gen " + std::to_string(ctx.round));
    return {"r", profile_.id.value, 0.1, false};
  }

  agents::EvaluationReply evaluate(const agents::CandidateView&, const agents::ContextPacket& ctx) override {
    std::lock_guard lock(mutex_);
    trace_.push_back("eval " + std::to_string(ctx.round));
    return {50.0, "fine", 0.1, false, false};
  }

 private:
  AgentProfile profile_;
  std::vector<std::string>& trace_;
  std::mutex& mutex_;
};

std::vector<std::unique_ptr<agents::Agent>> simulated_team(const SessionManifest& manifest, std::uint64_t seed) {
  std::vector<std::unique_ptr<agents::Agent>> team;
  std::uint64_t salt = seed;
  for (const auto& id : manifest.agents) {
    agents::SimParams sim;
    sim.p_g = 0.45;
    sim.p_v = 0.8;
    sim.fp_rate = 0.2;
    sim.fatigue_kappa = 0.6;
    sim.seed = ++salt;
    team.push_back(std::make_unique<agents::SimulatedAgent>(test_support::profile(id.value), sim));
  }
  return team;
}

SessionManifest simulated_manifest(std::uint64_t seed) {
  SessionManifest m;
  m.session_id = "sim";
  m.agents = {{"x"}, {"y"}, {"z"}};
  m.t_opt = 7;
  m.epsilon = 0.0;
  m.seed = seed;
  return m;
}

}  // namespace

TEST_SUITE("orchestrator") {
  TEST_CASE("peer-favoured proposal wins the round") {
    auto panel = three_way(1);
    const auto record = panel.run();
    REQUIRE(record.rounds.size() == 1);
    CHECK(record.rounds[0].winner.author.value == "b");
    CHECK(record.rounds[0].winner.answer == "B");
    // sqrt(0.9) + sqrt(0.8) over two peers.
    CHECK(record.rounds[0].winner_score == doctest::Approx((std::sqrt(0.9) + std::sqrt(0.8)) / 2.0));
    CHECK(record.final_answer.answer == "B");
  }

  TEST_CASE("epsilon of one halts after round one as converged") {
    auto panel = three_way(7, 1.0);
    const auto record = panel.run();
    CHECK(record.rounds.size() == 1);
    CHECK(record.halt_reason == consensus::HaltReason::Converged);
  }

  TEST_CASE("a one-round budget runs exactly one round") {
    auto panel = three_way(1, 0.0);
    const auto record = panel.run();
    CHECK(record.rounds.size() == 1);
    CHECK(record.halt_reason != consensus::HaltReason::None);
  }

  TEST_CASE("rounds never exceed the budget and the halt reason is always set") {
    for (int t_opt = 1; t_opt <= 6; ++t_opt) {
      auto panel = three_way(t_opt, 0.0);
      const auto record = panel.run();
      CHECK(static_cast<int>(record.rounds.size()) <= t_opt);
      CHECK(record.halt_reason != consensus::HaltReason::None);
    }
  }

  TEST_CASE("generation stall is hot-swapped and the round keeps three voters") {
    auto panel = three_way(1);
    panel.agents[1]->fail_generate = true;
    auto& reserve = panel.add_reserve("r", "R");
    const auto record = panel.run();
    REQUIRE(record.swaps.size() == 1);
    CHECK(record.swaps[0].stalled.value == "b");
    CHECK(record.swaps[0].replacement.value == "r");
    CHECK(record.swaps[0].phase == "generate");
    CHECK(record.history[0].votes.size == 3);
    CHECK(reserve.packets.size() == 1);
    CHECK(reserve.packets[0] == panel.agents[0]->packets[0]);
    CHECK(panel.team[1]->profile().id.value == "r");
  }

  TEST_CASE("timeout by reported latency counts as a stall") {
    auto panel = three_way(1);
    panel.agents[2]->gen_elapsed_s = 120.0;
    panel.add_reserve("r", "R");
    const auto record = panel.run();
    REQUIRE(record.swaps.size() == 1);
    CHECK(record.swaps[0].stalled.value == "c");
  }

  TEST_CASE("without reserves the round degrades to N minus one") {
    auto panel = three_way(1);
    panel.agents[2]->fail_generate = true;
    const auto record = panel.run();
    const auto& entry = record.history[0];
    REQUIRE(entry.votes.size == 2);
    CHECK(entry.votes.at(0, 0) == 0.0);
    CHECK(entry.votes.at(1, 1) == 0.0);
    // b's proposal scored 90 by a only; a's scored 10 by b.
    CHECK(record.rounds[0].winner.author.value == "b");
    CHECK(record.rounds[0].winner_score == doctest::Approx(std::sqrt(0.9)));
    bool dropped = false;
    for (const auto& e : record.events) dropped |= e.kind == EventKind::agent_dropped && e.agent == "c";
    CHECK(dropped);
  }

  TEST_CASE("evaluation stall without reserves drops the evaluator and their proposal") {
    auto panel = three_way(1);
    panel.agents[0]->fail_evaluate = true;
    const auto record = panel.run();
    const auto& entry = record.history[0];
    CHECK(entry.votes.size == 2);
    for (const auto& p : entry.proposals) CHECK(p.author.value != "a");
  }

  TEST_CASE("evaluation stall with a reserve keeps the original proposal") {
    auto panel = three_way(1);
    panel.agents[0]->fail_evaluate = true;
    panel.add_reserve("r", "R");
    const auto record = panel.run();
    CHECK(record.history[0].votes.size == 3);
    REQUIRE(record.swaps.size() == 1);
    CHECK(record.swaps[0].phase == "evaluate");
    std::set<std::string> authors;
    for (const auto& p : record.history[0].proposals) authors.insert(p.author.value);
    CHECK(authors == std::set<std::string>{"a", "b", "c"});
  }

  TEST_CASE("all agents stalling is AgentFailure") {
    auto panel = three_way(1);
    for (auto* a : panel.agents) a->fail_generate = true;
    panel.add_reserve("r", "R").fail_generate = true;
    CHECK_THROWS_WITH_AS(panel.run(), doctest::Contains("AgentFailure"), Error);
  }

  TEST_CASE("session latency above the SLA is Timeout") {
    auto panel = three_way(3);
    RunOptions options;
    options.max_latency_s = 2.0;  // round one takes 1.0 + 3 * 0.5
    CHECK_THROWS_WITH_AS(panel.run(options), doctest::Contains("Timeout"), Error);
  }

  TEST_CASE("team not matching the manifest is rejected") {
    auto panel = three_way(1);
    panel.manifest.agents[2] = {"zzz"};
    CHECK_THROWS_WITH_AS(panel.run(), doctest::Contains("PreconditionViolated"), Error);
  }

  TEST_CASE("no evaluation starts before every proposal is in") {
    std::vector<std::string> trace;
    std::mutex mutex;
    SessionManifest m;
    m.session_id = "barrier";
    m.t_opt = 4;
    m.epsilon = 0.0;
    std::vector<std::unique_ptr<agents::Agent>> team;
    for (const char* id : {"a", "b", "c", "d"}) {
      team.push_back(std::make_unique<TracingAgent>(id, trace, mutex));
      m.agents.push_back({id});
    }
    ReservePool none;
    const auto record = run_deliberation("task", m, team, none);
    for (int t = 1; t <= static_cast<int>(record.rounds.size()); ++t) {
      const std::string gen = "gen " + std::to_string(t), eval = "eval " + std::to_string(t);
      const auto last_gen = std::find(trace.rbegin(), trace.rend(), gen).base();
      const auto first_eval = std::find(trace.begin(), trace.end(), eval);
      CHECK(std::distance(trace.begin(), last_gen) <= std::distance(trace.begin(), first_eval));
    }
    for (int t = 1; t <= static_cast<int>(record.rounds.size()); ++t) {
      std::ptrdiff_t last_proposal = -1, first_request = -1;
      for (std::size_t i = 0; i < record.events.size(); ++i) {
        const auto& e = record.events[i];
        if (e.round != t) continue;
        if (e.kind == EventKind::proposal_received) last_proposal = static_cast<std::ptrdiff_t>(i);
        if (e.kind == EventKind::evaluate_requested && first_request < 0) first_request = static_cast<std::ptrdiff_t>(i);
      }
      CHECK(last_proposal < first_request);
    }
  }

  TEST_CASE("evaluators never see author ids and tokens change every round") {
    auto panel = three_way(4, 0.0);
    const auto record = panel.run();
    REQUIRE(record.rounds.size() >= 2);
    std::map<std::string, int> token_rounds;
    for (auto* agent : panel.agents) {
      for (const auto& c : agent->seen) {
        CHECK(std::regex_match(c.blinded_id, std::regex("c-[0-9a-f]{12}[0-9]+")));
        for (const auto& id : panel.manifest.agents) CHECK(c.blinded_id != id.value);
      }
      for (const auto& packet : agent->packets) {
        if (!packet.previous_votes) continue;
        for (const auto& label : packet.previous_votes->labels) {
          CHECK(std::regex_match(label, std::regex("c-[0-9a-f]{12}[0-9]+")));
        }
      }
    }
    for (const auto& entry : record.history) {
      for (const auto& p : entry.proposals) token_rounds[p.blinded_id]++;
    }
    for (const auto& [token, count] : token_rounds) CHECK(count == 1);
  }

  TEST_CASE("constraints injected mid-session reach every later packet") {
    auto panel = three_way(4, 0.0);
    RunOptions options;
    options.constraint_source = [](int round) {
      return round == 2 ? std::vector<std::string>{"answer in base 2"} : std::vector<std::string>{};
    };
    const auto record = panel.run(options);
    for (auto* agent : panel.agents) {
      for (const auto& packet : agent->packets) {
        const bool present = std::find(packet.input_buffer.begin(), packet.input_buffer.end(), "answer in base 2") !=
                             packet.input_buffer.end();
        CHECK(present == (packet.round >= 2));
      }
    }
    CHECK(record.input_buffer == std::vector<std::string>{"task", "answer in base 2"});
  }

  TEST_CASE("first packet holds the task only; third holds the previous matrix and controversy") {
    auto panel = three_way(4, 0.0);
    const auto record = panel.run();
    REQUIRE(record.rounds.size() >= 3);
    const auto& packets = panel.agents[0]->packets;
    CHECK(packets[0].input_buffer == std::vector<std::string>{"task"});
    CHECK_FALSE(packets[0].consensus.has_value());
    CHECK_FALSE(packets[0].previous_votes.has_value());
    CHECK(packets[0].critiques.empty());
    const auto& third = packets[2];
    REQUIRE(third.previous_votes.has_value());
    CHECK(third.previous_votes->round == 2);
    CHECK(third.controversy.size() == third.previous_votes->size);
    for (std::size_t k = 0; k < third.controversy.size(); ++k) {
      CHECK(third.controversy[k] == voting::controversy_score(*third.previous_votes, k));
    }
    // Agent a hears from b and c only.
    CHECK(third.critiques.size() == 2);
  }

  TEST_CASE("identical inputs give identical records") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      const auto m = simulated_manifest(seed);
      auto team_a = simulated_team(m, seed);
      auto team_b = simulated_team(m, seed);
      ReservePool ra, rb;
      const auto a = run_deliberation("task", m, team_a, ra);
      RunOptions serial;
      serial.parallel = false;
      const auto b = run_deliberation("task", m, team_b, rb, serial);
      CHECK(a == b);
    }
  }

  TEST_CASE("recorded matrices are masked and the final answer follows the kernel") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto m = simulated_manifest(seed);
      m.consensus_strategy = {seed % 2 ? KernelKind::linear : KernelKind::history_max, 0.2};
      auto team = simulated_team(m, seed);
      ReservePool none;
      const auto record = run_deliberation("task", m, team, none);
      for (const auto& entry : record.history) {
        for (std::size_t j = 0; j < entry.votes.size; ++j) CHECK(entry.votes.at(j, j) == 0.0);
        for (double v : entry.votes.entries) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        }
      }
      CHECK(record.final_answer == consensus::select_consensus(record.history, m.consensus_strategy).proposal);
      CHECK(static_cast<int>(record.rounds.size()) <= m.t_opt);
    }
  }

  TEST_CASE("anonymize is reproducible, identity for one candidate, and hides authors") {
    std::vector<Proposal> props;
    for (const char* id : {"alpha", "beta", "gamma"}) props.push_back({1, {id}, "", "r", std::string("ans-") + id});
    const auto a = anonymize(props, 5);
    const auto b = anonymize(props, 5);
    CHECK(a.author_index == b.author_index);
    CHECK(a.candidates == b.candidates);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(a.candidates[k].answer == props[a.author_index[k]].answer);
      for (const char* id : {"alpha", "beta", "gamma"}) CHECK(a.candidates[k].blinded_id.find(id) == std::string::npos);
    }
    const auto one = anonymize({props[0]}, 5);
    CHECK(one.author_index == std::vector<std::size_t>{0});
  }

  TEST_CASE("property: each position assignment is roughly uniform over seeds") {
    std::vector<Proposal> props(3);
    std::array<std::array<int, 3>, 3> counts{};
    const int seeds = 3000;
    for (int s = 0; s < seeds; ++s) {
      const auto out = anonymize(props, agents::mix_seed(17, static_cast<std::uint64_t>(s)));
      for (std::size_t k = 0; k < 3; ++k) counts[out.author_index[k]][k]++;
    }
    for (const auto& row : counts) {
      for (int c : row) CHECK(std::abs(c - seeds / 3) < 4 * std::sqrt(seeds * (1.0 / 3) * (2.0 / 3)));
    }
  }

  TEST_CASE("hot_swap picks the closest reserve with ties to the lower id") {
    const auto stalled = test_support::profile("s", 0.5, 0.5);
    const std::vector<AgentProfile> reserves{test_support::profile("z", 0.5, 0.75), test_support::profile("m", 0.25, 0.5),
                                             test_support::profile("far", 0.1, 0.1)};
    CHECK(hot_swap(stalled, reserves) == 1);
    CHECK_THROWS_WITH_AS(hot_swap(stalled, {}), doctest::Contains("NoReserves"), Error);
  }

  TEST_CASE("event kinds round-trip") {
    for (int k = 0; k <= static_cast<int>(EventKind::halted); ++k) {
      const auto kind = static_cast<EventKind>(k);
      CHECK(event_kind_from_string(to_string(kind)) == kind);
    }
  }
}

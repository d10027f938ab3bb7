#include <doctest.h>

#include "nsed/consensus.hpp"
#include "nsed/core_types.hpp"

using namespace nsed;

namespace {

SessionManifest three_agent_manifest() {
  SessionManifest m;
  m.session_id = "s1";
  m.agents = {{"a"}, {"b"}, {"c"}};
  m.t_opt = 7;
  m.gamma_base = 0.8;
  return m;
}

RoundEntry single_winner_round(int round, const std::string& answer) {
  RoundEntry e;
  e.round = round;
  e.proposals = {{round, {"a"}, "tok" + std::to_string(round), "r", answer}};
  e.votes = VoteMatrix(round, 1);
  e.scores = {0.7};
  e.winner = 0;
  return e;
}

}  // namespace

TEST_SUITE("core_types") {
  TEST_CASE("valid manifest passes unchanged") {
    const auto m = three_agent_manifest();
    CHECK(validate_manifest(m) == m);
    CHECK(manifest_issues(m).empty());
  }

  TEST_CASE("empty team is rejected with EmptyTeam") {
    auto m = three_agent_manifest();
    m.agents.clear();
    try {
      validate_manifest(m);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyTeam);
    }
  }

  TEST_CASE("gamma above one is rejected with GammaOutOfRange") {
    auto m = three_agent_manifest();
    m.gamma_base = 1.5;
    try {
      validate_manifest(m);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::GammaOutOfRange);
    }
  }

  TEST_CASE("multiple violations are all listed") {
    auto m = three_agent_manifest();
    m.agents.clear();
    m.t_opt = 0;
    m.gamma_base = -0.1;
    const auto issues = manifest_issues(m);
    CHECK(issues.size() >= 3);
    try {
      validate_manifest(m);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidManifest);
      const std::string what = e.what();
      CHECK(what.find("EmptyTeam") != std::string::npos);
      CHECK(what.find("GammaOutOfRange") != std::string::npos);
    }
  }

  TEST_CASE("zero vote budget and round budget are NonPositiveBudget") {
    auto m = three_agent_manifest();
    m.vote_budget = 0;
    CHECK_THROWS_AS(validate_manifest(m), Error);
    CHECK(manifest_issues(m).front().code == ErrorCode::NonPositiveBudget);
    m = three_agent_manifest();
    m.t_opt = 0;
    CHECK(manifest_issues(m).front().code == ErrorCode::NonPositiveBudget);
  }

  TEST_CASE("profile probabilities must lie in [0,1]") {
    AgentProfile p;
    p.id = {"x"};
    CHECK_NOTHROW(validate_profile(p));
    p.ver_precision = 1.2;
    CHECK_THROWS_AS(validate_profile(p), Error);
    p.ver_precision = 0.7;
    p.mean_latency_s = 0.0;
    CHECK_THROWS_AS(validate_profile(p), Error);
  }

  TEST_CASE("kernel names round-trip, dictator is spelled live") {
    CHECK(std::string(to_string(KernelKind::dictator)) == "live");
    for (auto k : {KernelKind::dictator, KernelKind::history_max, KernelKind::linear, KernelKind::exponential}) {
      CHECK(kernel_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(kernel_kind_from_string("median"), Error);
  }

  TEST_CASE("input buffer is append-only across commits") {
    DeliberationState state("solve x");
    std::vector<std::string> before = state.input_buffer();
    for (int t = 1; t <= 5; ++t) {
      if (t == 3) state.append_constraint("answer in binary");
      state = consensus::commit_state(state, single_winner_round(t, "ans" + std::to_string(t)), 0.8);
      const auto& now = state.input_buffer();
      REQUIRE(now.size() >= before.size());
      CHECK(std::equal(before.begin(), before.end(), now.begin()));
      before = now;
    }
    CHECK(state.input_buffer() == std::vector<std::string>{"solve x", "answer in binary"});
  }

  TEST_CASE("old rounds leave the active window but stay readable through history") {
    DeliberationState state("task");
    for (int t = 1; t <= 5; ++t) state = consensus::commit_state(state, single_winner_round(t, "a" + std::to_string(t)), 0.8);
    std::vector<int> active;
    for (const auto* e : state.active_rounds()) active.push_back(e->round);
    CHECK(active == std::vector<int>{3, 4, 5});
    const auto old = state.read_proposal(1, "tok1");
    REQUIRE(old.has_value());
    CHECK(old->answer == "a1");
    CHECK_FALSE(state.read_proposal(1, "missing").has_value());
  }

  TEST_CASE("digest is a single bounded line") {
    Proposal p;
    p.answer = std::string(200, 'x') + "\nsecond line";
    const auto d = digest_of(p, 40);
    CHECK(d.size() == 40);
    CHECK(d.find('\n') == std::string::npos);
  }
}

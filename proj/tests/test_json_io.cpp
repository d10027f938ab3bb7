#include <doctest.h>

#include <fstream>

#include "nsed/cli.hpp"
#include "nsed/json_io.hpp"
#include "nsed/orchestrator.hpp"
#include "support.hpp"

using namespace nsed;
using nlohmann::json;

namespace {

template <class T>
T round_trip(const T& value) {
  return json(value).get<T>();
}

}  // namespace

TEST_SUITE("json_io") {
  TEST_CASE("manifest, profile, SLA and kernel round-trip") {
    SessionManifest m;
    m.session_id = "s-1";
    m.agents = {{"a"}, {"b"}};
    m.t_opt = 6;
    m.gamma_base = 0.7;
    m.epsilon = 0.01;
    m.consensus_strategy = {KernelKind::exponential, 1.25};
    m.vote_budget = 80;
    m.seed = 0xFFFFFFFFFFFFFFFFULL;
    CHECK(round_trip(m) == m);

    auto p = test_support::profile("x", 0.61, 0.83);
    p.domain_tags = {"math", "code"};
    p.halluc_rate = 0.132;
    CHECK(round_trip(p) == p);

    const Sla sla{300.0, 2.5, 0.4, 0.1};
    CHECK(round_trip(sla) == sla);

    CHECK(json("live").get<TemporalKernel>() == TemporalKernel{KernelKind::dictator, 0.0});
    CHECK(json(TemporalKernel{KernelKind::linear, 0.2}).get<TemporalKernel>() == TemporalKernel{KernelKind::linear, 0.2});
  }

  TEST_CASE("bindings round-trip for both backends") {
    agents::SimParams sim;
    sim.p_g = 0.45;
    sim.fatigue_kappa = 0.6;
    sim.seed = 12345;
    const agents::AgentBinding simulated{test_support::profile("s"), sim};
    CHECK(round_trip(simulated) == simulated);

    agents::RemoteParams remote;
    remote.endpoint = "http://localhost:8000/v1";
    remote.model = "m";
    remote.persona = "strict";
    remote.temperature = 0.2;
    const agents::AgentBinding wired{test_support::profile("r"), remote};
    CHECK(round_trip(wired) == wired);
  }

  TEST_CASE("negative remote temperature is ConfigError") {
    json j = json(agents::AgentBinding{test_support::profile("r"), agents::RemoteParams{}});
    j["backend"]["temperature"] = -1.0;
    CHECK_THROWS_WITH_AS(j.get<agents::AgentBinding>(), doctest::Contains("ConfigError"), Error);
  }

  TEST_CASE("session record round-trips exactly") {
    SessionManifest m;
    m.session_id = "rt";
    m.agents = {{"a"}, {"b"}, {"c"}};
    m.t_opt = 4;
    m.epsilon = 0.0;
    m.seed = 7;
    std::vector<std::unique_ptr<agents::Agent>> team;
    for (const auto& id : m.agents) {
      agents::SimParams sim;
      sim.p_g = 0.5;
      sim.p_v = 0.8;
      sim.fp_rate = 0.2;
      sim.fatigue_kappa = 0.5;
      sim.latency_jitter_s = 0.3;
      sim.seed = id.value[0];
      team.push_back(std::make_unique<agents::SimulatedAgent>(test_support::profile(id.value), sim));
    }
    orchestrator::ReservePool none;
    const auto record = orchestrator::run_deliberation("task", m, team, none);
    CHECK(round_trip(record) == record);
    CHECK(json::parse(json(record).dump()).get<orchestrator::SessionRecord>() == record);
  }

  TEST_CASE("file errors map to IoError and ConfigError") {
    const auto dir = test_support::scratch_dir("json_io");
    CHECK_THROWS_WITH_AS(json_io::read_file(dir / "missing.json"), doctest::Contains("IoError"), Error);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_WITH_AS(json_io::read_file(dir / "bad.json"), doctest::Contains("ConfigError"), Error);
    std::ofstream(dir / "wrong.json") << R"({"agents": 3})";
    CHECK_THROWS_WITH_AS(json_io::load<SessionManifest>(dir / "wrong.json"), doctest::Contains("ConfigError"), Error);
  }

  TEST_CASE("shipped pools load") {
    for (const char* name : {"pool_mediocre.json", "pool_high.json", "pool_condorcet_fail.json"}) {
      CAPTURE(name);
      const auto pool = cli::load_pool(test_support::data_dir() / name);
      CHECK(pool.agents.size() == 3);
      for (const auto& b : pool.agents) CHECK_NOTHROW(validate_profile(b.profile));
    }
  }

  TEST_CASE("pool save and load round-trip") {
    const auto dir = test_support::scratch_dir("pool_rt");
    const auto pool = cli::load_pool(test_support::data_dir() / "pool_mediocre.json");
    cli::save_pool(dir / "pool.json", pool);
    const auto again = cli::load_pool(dir / "pool.json");
    CHECK(again.agents == pool.agents);
    CHECK(again.reserves == pool.reserves);
  }
}

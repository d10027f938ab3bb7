#include <doctest.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "nsed/broker.hpp"
#include "nsed/cli.hpp"
#include "nsed/csv.hpp"
#include "nsed/json_io.hpp"
#include "nsed/telemetry.hpp"
#include "support.hpp"

using namespace nsed;
namespace fs = std::filesystem;

namespace {

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "nsed");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  return code;
}

std::string data(const char* name) { return (test_support::data_dir() / name).string(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("compose writes a valid manifest") {
    const auto dir = test_support::scratch_dir("cli_compose");
    const auto out = (dir / "manifest.json").string();
    REQUIRE(invoke({"compose", "--pool", data("pool_mediocre.json"), "--task", data("task_sample.json"), "--seed", "3",
                    "--out", out}) == 0);
    const auto m = json_io::load<SessionManifest>(out);
    CHECK_NOTHROW(validate_manifest(m));
    CHECK(m.seed == 3);
    CHECK_FALSE(m.agents.empty());
  }

  TEST_CASE("compose exit codes for Infeasible, CondorcetFail and bad input") {
    const auto dir = test_support::scratch_dir("cli_codes");
    const auto out = (dir / "m.json").string();
    CHECK(invoke({"compose", "--pool", data("pool_mediocre.json"), "--max-cost", "1e-12", "--out", out}) ==
          cli::kInfeasible);
    CHECK(invoke({"compose", "--pool", data("pool_condorcet_fail.json"), "--out", out}) == cli::kCondorcetFail);
    CHECK(invoke({"compose", "--pool", (dir / "nope.json").string()}) == cli::kConfigError);
    CHECK(invoke({"compose", "--pool", data("pool_mediocre.json"), "--strategy", "median", "--out", out}) ==
          cli::kConfigError);
  }

  TEST_CASE("lambda sweep writes a Pareto table with nonincreasing cost") {
    const auto dir = test_support::scratch_dir("cli_sweep");
    REQUIRE(invoke({"compose", "--pool", data("pool_mediocre.json"), "--task", data("task_sample.json"),
                    "--lambda-sweep", "0,1,10,100,1000", "--out", (dir / "m.json").string()}) == 0);
    const auto rows = csv::read_file(dir / "pareto.csv");
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == csv::Row{"lambda", "cost", "utility", "latency_s", "objective", "t", "team"});
    for (std::size_t k = 2; k < rows.size(); ++k) {
      CHECK(csv::parse_double(rows[k][1]) <= csv::parse_double(rows[k - 1][1]));
    }
  }

  TEST_CASE("simulate is byte-for-byte reproducible, serial or parallel") {
    const auto a = test_support::scratch_dir("cli_sim_a");
    const auto b = test_support::scratch_dir("cli_sim_b");
    const std::vector<std::string> common{"simulate", "--pool", data("pool_mediocre.json"), "--replications", "25",
                                          "--seed", "11"};
    auto args_a = common;
    args_a.insert(args_a.end(), {"--out", a.string()});
    auto args_b = common;
    args_b.insert(args_b.end(), {"--out", b.string(), "--serial"});
    REQUIRE(invoke(args_a) == 0);
    REQUIRE(invoke(args_b) == 0);
    for (const char* f : {"trajectory.csv", "influence.csv", "win_rate.csv", "latency.csv", "telemetry.json"}) {
      CAPTURE(f);
      CHECK(fs::exists(a / f));
      CHECK(slurp(a / f) == slurp(b / f));
    }
    const auto rows = csv::read_file(a / "trajectory.csv");
    CHECK(rows[0] == csv::Row{"round", "accuracy", "stderr", "n"});
    CHECK(rows.size() == 8);
  }

  TEST_CASE("different seeds give different trajectories") {
    std::ostringstream log;
    cli::RunConfig config;
    config.pool = data("pool_mediocre.json");
    config.replications = 25;
    config.out = test_support::scratch_dir("cli_sim_seed");
    config.seed = 1;
    const auto one = cli::cmd_simulate(config, log);
    config.seed = 2;
    const auto two = cli::cmd_simulate(config, log);
    CHECK(one.accuracy != two.accuracy);
    CHECK(one.reports.size() == 25);
  }

  TEST_CASE("fit writes parameters and a model curve") {
    const auto dir = test_support::scratch_dir("cli_fit");
    REQUIRE(invoke({"fit", data("trajectory_mediocre.csv"), "--p-g", "0.675", "--p-v", "0.7328", "--out", dir.string()}) == 0);
    const auto params = json_io::load<ThermoParams>(dir / "params.json");
    CHECK(params.r_squared >= 0.98);
    CHECK(params.t_opt >= 1);
    const auto curve = csv::read_file(dir / "curve.csv");
    CHECK(curve[0] == csv::Row{"round", "observed", "predicted"});
    CHECK(curve.size() == 8);
    REQUIRE(invoke({"fit", data("trajectory_mediocre.csv"), "--p-g", "0.675", "--fit-pv", "--out", dir.string()}) == 0);
  }

  TEST_CASE("fit on too few points exits with the fit error code") {
    const auto dir = test_support::scratch_dir("cli_fit_short");
    std::ofstream(dir / "t.csv") << "round,accuracy\n1,0.5\n2,0.6\n3,0.65\n";
    CHECK(invoke({"fit", (dir / "t.csv").string(), "--p-g", "0.5", "--p-v", "0.7", "--out", dir.string()}) ==
          cli::kFitError);
  }

  TEST_CASE("run writes a session, phase timings and telemetry; constraints are picked up") {
    const auto dir = test_support::scratch_dir("cli_run");
    std::ofstream(dir / "constraints.txt") << "give the answer as an integer\n";
    std::ostringstream log;
    cli::RunConfig config;
    config.pool = data("pool_mediocre.json");
    config.out = dir / "out";
    config.seed = 5;
    config.epsilon = 0.0;
    config.constraints = dir / "constraints.txt";
    const auto record = cli::cmd_run(config, log);
    CHECK(fs::exists(config.out / "session.json"));
    CHECK(fs::exists(config.out / "telemetry.json"));
    const auto timing = csv::read_file(config.out / "phase_timing.csv");
    CHECK(timing[0] == csv::Row{"round", "gen_s", "eval_s", "total_s", "cumulative_s"});
    CHECK(timing.size() == record.rounds.size() + 1);
    CHECK(record.input_buffer.size() == 2);
    CHECK(record.input_buffer[1] == "give the answer as an integer");
  }

  TEST_CASE("report updates priors and the feedback log caps later budgets") {
    const auto dir = test_support::scratch_dir("cli_report");
    REQUIRE(invoke({"compose", "--pool", data("pool_mediocre.json"), "--out", (dir / "m.json").string()}) == 0);
    const auto manifest = json_io::load<SessionManifest>(dir / "m.json");
    CHECK(manifest.t_opt > 4);

    cli::RunConfig config;
    config.pool = data("pool_mediocre.json");
    config.manifest = dir / "m.json";
    config.out = dir / "run";
    config.seed = manifest.seed;
    std::ostringstream log;
    cli::cmd_run(config, log);
    REQUIRE(invoke({"report", (dir / "run" / "telemetry.json").string(), "--manifest", (dir / "m.json").string(),
                    "--pool", data("pool_mediocre.json"), "--update-pool", (dir / "pool2.json").string(),
                    "--feedback-log", (dir / "log.jsonl").string()}) == 0);
    const auto before = cli::load_pool(data("pool_mediocre.json"));
    const auto after = cli::load_pool(dir / "pool2.json");
    bool moved = false;
    for (std::size_t i = 0; i < before.agents.size(); ++i) {
      moved |= before.agents[i].profile.quality_prior != after.agents[i].profile.quality_prior;
    }
    CHECK(moved);

    telemetry::InfluenceReport converged;
    converged.session_id = "x";
    converged.ensemble = broker::ensemble_key(manifest.agents);
    converged.convergence_round = 4;
    fs::remove(dir / "log.jsonl");
    cli::append_feedback_log(dir / "log.jsonl", {converged, converged, converged});
    const auto memory = cli::load_feedback_log(dir / "log.jsonl");
    CHECK(memory.t_cap(manifest.agents) == 4);
    REQUIRE(invoke({"compose", "--pool", data("pool_mediocre.json"), "--memory", (dir / "log.jsonl").string(), "--out",
                    (dir / "m2.json").string()}) == 0);
    CHECK(json_io::load<SessionManifest>(dir / "m2.json").t_opt <= 4);
  }

  TEST_CASE("update-pool without a manifest is a config error") {
    const auto dir = test_support::scratch_dir("cli_report_bad");
    telemetry::export_reports({}, dir);
    CHECK(invoke({"report", (dir / "telemetry.json").string(), "--update-pool", (dir / "p.json").string()}) ==
          cli::kConfigError);
  }

  TEST_CASE("error codes map to exit codes") {
    CHECK(cli::exit_code_for(ErrorCode::Infeasible) == 3);
    CHECK(cli::exit_code_for(ErrorCode::CondorcetFail) == 4);
    CHECK(cli::exit_code_for(ErrorCode::AgentFailure) == 5);
    CHECK(cli::exit_code_for(ErrorCode::NoReserves) == 5);
    CHECK(cli::exit_code_for(ErrorCode::MalformedOutput) == 5);
    CHECK(cli::exit_code_for(ErrorCode::InsufficientData) == 6);
    CHECK(cli::exit_code_for(ErrorCode::Timeout) == 7);
    CHECK(cli::exit_code_for(ErrorCode::ConfigError) == 2);
    CHECK(invoke({}) == cli::kConfigError);
  }
}

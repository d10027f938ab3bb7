#include "nsed/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nsed/csv.hpp"
#include "nsed/json_io.hpp"

namespace nsed::cli {

using nlohmann::json;
using csv::format_double;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Infeasible: return kInfeasible;
    case ErrorCode::CondorcetFail: return kCondorcetFail;
    case ErrorCode::AgentFailure:
    case ErrorCode::NoReserves:
    case ErrorCode::MalformedOutput:
    case ErrorCode::HttpError: return kAgentFailure;
    case ErrorCode::Timeout: return kTimeout;
    case ErrorCode::InsufficientData:
    case ErrorCode::DegenerateVariance:
    case ErrorCode::InvalidTrajectory: return kFitError;
    default: return kConfigError;
  }
}

PoolFile load_pool(const fs::path& path) {
  const auto j = json_io::read_file(path);
  PoolFile pool;
  try {
    j.at("agents").get_to(pool.agents);
    if (j.contains("reserves")) j.at("reserves").get_to(pool.reserves);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  for (const auto& b : pool.agents) validate_profile(b.profile);
  for (const auto& b : pool.reserves) validate_profile(b.profile);
  return pool;
}

void save_pool(const fs::path& path, const PoolFile& pool) {
  json_io::write_file(path, json{{"agents", pool.agents}, {"reserves", pool.reserves}});
}

thermo::Trajectory load_trajectory(const fs::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw Error(ErrorCode::InsufficientData, path.string() + " is empty");
  const auto& header = rows.front();
  const auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(ErrorCode::ConfigError, path.string() + ": missing column '" + name + "'");
  };
  const auto round_col = column("round");
  const auto acc_col = column("accuracy");
  thermo::Trajectory traj;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() <= std::max(round_col, acc_col)) throw Error(ErrorCode::ConfigError, path.string() + ": short row");
    traj.points.push_back({static_cast<int>(csv::parse_double(row[round_col])), csv::parse_double(row[acc_col])});
  }
  return traj;
}

namespace {

broker::TaskProfile load_task(const std::optional<fs::path>& path) {
  if (!path) return broker::TaskProfile{"synthetic task", {}, 1000, broker::Complexity::medium};
  return json_io::load<broker::TaskProfile>(*path);
}

std::vector<AgentProfile> profiles_of(const std::vector<agents::AgentBinding>& bindings) {
  std::vector<AgentProfile> out;
  for (const auto& b : bindings) out.push_back(b.profile);
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

// Team in manifest order, or the whole pool when no manifest is given.
SessionManifest manifest_for(const RunConfig& config, const PoolFile& pool) {
  SessionManifest m;
  if (config.manifest) {
    m = json_io::load<SessionManifest>(*config.manifest);
  } else {
    for (const auto& b : pool.agents) m.agents.push_back(b.profile.id);
    m.t_opt = config.rounds;
    m.gamma_base = config.gamma_base;
    m.epsilon = config.epsilon;
    m.consensus_strategy = config.strategy;
    m.seed = config.seed;
  }
  return validate_manifest(m), m;
}

const agents::AgentBinding& binding_for(const PoolFile& pool, const AgentId& id) {
  for (const auto& b : pool.agents) {
    if (b.profile.id == id) return b;
  }
  for (const auto& b : pool.reserves) {
    if (b.profile.id == id) return b;
  }
  throw Error(ErrorCode::UnknownAgent, "agent '" + id.value + "' is not in the pool");
}

void write_solution(std::ostream& log, const std::vector<AgentProfile>& pool, const broker::CompositionSolution& s) {
  log << "team:";
  for (auto i : s.members) log << ' ' << pool[i].id.value;
  log << "\nrounds (t_opt): " << s.t << "\npredicted utility: " << s.predicted_utility
      << "\npredicted cost: " << s.predicted_cost << "\npredicted latency_s: " << s.predicted_latency_s
      << "\nobjective: " << s.objective << '\n';
}

}  // namespace

void append_feedback_log(const fs::path& path, const std::vector<telemetry::InfluenceReport>& reports) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::IoError, "cannot append to " + path.string());
  for (const auto& r : reports) {
    json shares = json::object();
    for (std::size_t i = 0; i < r.agents.size(); ++i) shares[r.agents[i].value] = r.vote_share.at(i);
    json line{{"session_id", r.session_id},
              {"ensemble", r.ensemble},
              {"rounds", r.rounds},
              {"convergence_round", r.convergence_round ? json(*r.convergence_round) : json(nullptr)},
              {"vote_share", shares}};
    out << line.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

broker::BrokerMemory load_feedback_log(const fs::path& path) {
  broker::BrokerMemory memory;
  std::ifstream in(path);
  if (!in) return memory;
  std::string text;
  for (int line_no = 1; std::getline(in, text); ++line_no) {
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto line = json::parse(text, nullptr, false);
    if (!line.is_object() || !line.contains("ensemble") || !line["ensemble"].is_string()) {
      throw Error(ErrorCode::ConfigError, path.string() + ":" + std::to_string(line_no) + ": not a feedback record");
    }
    const auto& round = line.value("convergence_round", json(nullptr));
    memory.convergence_rounds[line["ensemble"].get<std::string>()].push_back(round.is_number_integer() ? round.get<int>() : 0);
  }
  return memory;
}

broker::Composition cmd_compose(const ComposeConfig& config, std::ostream& log) {
  const auto pool_file = load_pool(config.pool);
  const auto pool = profiles_of(pool_file.agents);
  const auto task = load_task(config.task);
  std::optional<broker::BrokerMemory> memory;
  if (config.memory) memory = load_feedback_log(*config.memory);
  const broker::BrokerMemory* learned = memory ? &*memory : nullptr;

  const auto composition = broker::compose_session(pool, task, config.sla, config.broker, learned);
  write_solution(log, pool, composition.solution);
  if (config.out.has_parent_path()) ensure_dir(config.out.parent_path());
  json_io::write_file(config.out, composition.manifest);
  log << "manifest written to " << config.out.string() << '\n';

  if (!config.lambda_sweep.empty()) {
    const auto sweep_path = config.sweep_out.value_or(config.out.parent_path() / "pareto.csv");
    std::vector<csv::Row> rows{{"lambda", "cost", "utility", "latency_s", "objective", "t", "team"}};
    for (double lambda : config.lambda_sweep) {
      Sla sla = config.sla;
      sla.elasticity = lambda;
      const auto c = broker::compose_session(pool, task, sla, config.broker, learned);
      rows.push_back({format_double(lambda), format_double(c.solution.predicted_cost),
                      format_double(c.solution.predicted_utility), format_double(c.solution.predicted_latency_s),
                      format_double(c.solution.objective), std::to_string(c.solution.t),
                      broker::ensemble_key(c.manifest.agents)});
    }
    csv::write_file(sweep_path, rows);
    log << "lambda sweep written to " << sweep_path.string() << '\n';
  }
  return composition;
}

SimulationResult cmd_simulate(const RunConfig& config, std::ostream& log) {
  if (config.replications < 1) throw Error(ErrorCode::ConfigError, "replications must be >= 1");
  const auto pool = load_pool(config.pool);
  const auto base = manifest_for(config, pool);
  double mean_pv = 0.0;
  for (const auto& id : base.agents) {
    const auto& b = binding_for(pool, id);
    const auto* sim = std::get_if<agents::SimParams>(&b.backend);
    if (!sim) throw Error(ErrorCode::ConfigError, "simulate needs simulated backends; '" + id.value + "' is remote");
    mean_pv += sim->p_v;
  }
  mean_pv /= static_cast<double>(base.agents.size());

  const auto rounds = static_cast<std::size_t>(base.t_opt);
  std::vector<int> correct(rounds, 0);
  SimulationResult result;
  orchestrator::RunOptions options;
  options.agent_timeout_s = config.timeout_s;
  options.overhead_s = config.overhead_s;
  options.parallel = config.parallel;

  for (int r = 0; r < config.replications; ++r) {
    const std::uint64_t salt = agents::mix_seed(config.seed, static_cast<std::uint64_t>(r));
    SessionManifest manifest = base;
    manifest.seed = salt;
    manifest.session_id = "sim-" + std::to_string(config.seed) + "-" + std::to_string(r);

    std::vector<std::unique_ptr<agents::Agent>> team;
    for (const auto& id : manifest.agents) team.push_back(agents::make_agent(binding_for(pool, id), salt));
    orchestrator::ReservePool reserves;
    for (const auto& b : pool.reserves) reserves.add(agents::make_agent(b, salt));

    const auto record = orchestrator::run_deliberation("task-" + std::to_string(r), manifest, team, reserves, options);
    bool last = false;
    for (std::size_t t = 0; t < rounds; ++t) {
      if (t < record.rounds.size()) last = record.rounds[t].winner.answer == agents::kCorrectAnswer;
      correct[t] += last ? 1 : 0;
    }
    result.reports.push_back(telemetry::build_report(record, config.overhead_s));
  }

  const double n = static_cast<double>(config.replications);
  thermo::Trajectory traj;
  std::vector<csv::Row> rows{{"round", "accuracy", "stderr", "n"}};
  for (std::size_t t = 0; t < rounds; ++t) {
    const double p = correct[t] / n;
    result.accuracy.push_back(p);
    result.stderr_.push_back(std::sqrt(p * (1.0 - p) / n));
    result.sessions.push_back(config.replications);
    traj.points.push_back({static_cast<int>(t) + 1, p});
    rows.push_back({std::to_string(t + 1), format_double(p), format_double(result.stderr_.back()),
                    std::to_string(config.replications)});
  }
  ensure_dir(config.out);
  csv::write_file(config.out / "trajectory.csv", rows);
  telemetry::export_reports(result.reports, config.out);

  std::size_t peak = 0;
  for (std::size_t t = 1; t < rounds; ++t) {
    if (result.accuracy[t] > result.accuracy[peak]) peak = t;
  }
  log << "round accuracy stderr\n";
  for (std::size_t t = 0; t < rounds; ++t) {
    log << std::setw(5) << t + 1 << ' ' << std::fixed << std::setprecision(3) << result.accuracy[t] << ' '
        << result.stderr_[t] << '\n';
  }
  log << "peak round " << peak + 1 << ", gain " << result.accuracy[peak] - result.accuracy[0] << '\n';

  if (rounds >= 4) {
    try {
      const double p_g = result.accuracy[0];
      result.fit = mean_pv > p_g ? thermo::fit(traj, p_g, mean_pv) : thermo::fit_with_pv(traj, p_g, 4.0);
      log << "fit: efficiency " << std::setprecision(4) << result.fit->efficiency << ", fatigue "
          << std::setprecision(5) << result.fit->fatigue << ", R^2 " << std::setprecision(4) << result.fit->r_squared
          << ", t_opt " << result.fit->t_opt << '\n';
    } catch (const Error& e) {
      log << "fit skipped: " << e.what() << '\n';
    }
  }
  log.unsetf(std::ios::floatfield);
  log << std::setprecision(6);
  return result;
}

ThermoParams cmd_fit(const FitConfig& config, std::ostream& log) {
  const auto traj = load_trajectory(config.trajectory);
  ThermoParams params;
  if (config.fit_pv) {
    params = thermo::fit_with_pv(traj, config.p_g, config.efficiency);
  } else {
    if (!config.p_v) throw Error(ErrorCode::ConfigError, "--p-v is required unless --fit-pv is set");
    params = thermo::fit(traj, config.p_g, *config.p_v);
  }
  if (config.t_max) params.t_opt = thermo::optimal_stop(params, *config.t_max);

  ensure_dir(config.out);
  json_io::write_file(config.out / "params.json", params);
  std::vector<csv::Row> rows{{"round", "observed", "predicted"}};
  for (const auto& p : traj.points) {
    rows.push_back({std::to_string(p.round), format_double(p.accuracy), format_double(thermo::utility(p.round, params))});
  }
  csv::write_file(config.out / "curve.csv", rows);

  log << "efficiency (Lambda): " << params.efficiency << "\nfatigue (beta): " << params.fatigue
      << "\np_g: " << params.p_g << "  p_v: " << params.p_v << "\nR^2: " << params.r_squared
      << "  (excluding round 1: " << params.r_squared_excl_first << ")\nT_opt: " << params.t_opt << '\n';
  return params;
}

orchestrator::SessionRecord cmd_run(const RunConfig& config, std::ostream& log) {
  const auto pool = load_pool(config.pool);
  const auto task = load_task(config.task);
  auto manifest = manifest_for(config, pool);
  if (manifest.session_id.empty()) manifest.session_id = "session-" + std::to_string(manifest.seed);

  std::vector<std::unique_ptr<agents::Agent>> team;
  for (const auto& id : manifest.agents) team.push_back(agents::make_agent(binding_for(pool, id)));
  orchestrator::ReservePool reserves;
  for (const auto& b : pool.reserves) {
    if (std::find(manifest.agents.begin(), manifest.agents.end(), b.profile.id) == manifest.agents.end()) {
      reserves.add(agents::make_agent(b));
    }
  }

  orchestrator::RunOptions options;
  options.agent_timeout_s = config.timeout_s;
  options.overhead_s = config.overhead_s;
  options.max_latency_s = config.max_latency_s;
  options.parallel = config.parallel;
  std::size_t consumed = 0;
  if (config.constraints) {
    const auto path = *config.constraints;
    options.constraint_source = [path, &consumed](int) {
      std::vector<std::string> fresh;
      std::ifstream in(path);
      std::string line;
      std::size_t index = 0;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (index++ >= consumed) fresh.push_back(line);
      }
      consumed = index;
      return fresh;
    };
  }

  const auto record = orchestrator::run_deliberation(task, manifest, team, reserves, options);

  ensure_dir(config.out);
  json_io::write_file(config.out / "session.json", record);
  std::vector<csv::Row> rows{{"round", "gen_s", "eval_s", "total_s", "cumulative_s"}};
  for (const auto& r : telemetry::latency_report(record, config.overhead_s)) {
    rows.push_back({std::to_string(r.round), format_double(r.gen_s), format_double(r.eval_s), format_double(r.total_s),
                    format_double(r.cumulative_s)});
  }
  csv::write_file(config.out / "phase_timing.csv", rows);
  telemetry::export_reports({telemetry::build_report(record, config.overhead_s)}, config.out);

  for (const auto& e : record.events) {
    using orchestrator::EventKind;
    const bool notable = e.kind == EventKind::agent_stalled || e.kind == EventKind::hot_swapped ||
                         e.kind == EventKind::agent_dropped || e.kind == EventKind::halted ||
                         e.kind == EventKind::constraint_added || e.detail == "heuristic unwrap";
    if (notable) {
      log << "round " << e.round << ' ' << orchestrator::to_string(e.kind) << (e.agent.empty() ? "" : " ")
          << e.agent << (e.detail.empty() ? "" : ": ") << e.detail << '\n';
    }
  }
  log << "rounds: " << record.rounds.size() << "  halt: " << consensus::to_string(record.halt_reason)
      << "\nfinal answer (score " << record.final_score << "): " << record.final_answer.answer << '\n';
  return record;
}

void cmd_report(const ReportConfig& config, std::ostream& log) {
  const auto reports = telemetry::import_bundle(config.telemetry);
  std::optional<SessionManifest> manifest;
  if (config.manifest) manifest = json_io::load<SessionManifest>(*config.manifest);

  for (const auto& r : reports) {
    log << "session " << r.session_id << " (" << r.ensemble << ")\n";
    if (!r.agents.empty()) {
      std::size_t top = 0;
      for (std::size_t i = 1; i < r.agents.size(); ++i) {
        if (r.influence_score[i] > r.influence_score[top]) top = i;
      }
      log << "  top influencer: " << r.agents[top].value << " (influence " << r.influence_score[top] << ", share "
          << r.vote_share[top] << ")\n";
    }
    log << "  rounds: " << r.rounds << "  halt: " << consensus::to_string(r.halt_reason) << "  convergence round: "
        << (r.convergence_round ? std::to_string(*r.convergence_round) : "none") << '\n';
    if (manifest && manifest->session_id == r.session_id) {
      log << "  manifest t_opt: " << manifest->t_opt << " vs rounds used: " << r.rounds << '\n';
    }
    if (!r.latency.empty()) log << "  total latency_s: " << r.latency.back().cumulative_s << '\n';
  }
  const auto grid = telemetry::win_rate_matrix(reports);
  if (!grid.empty()) {
    log << "win rates (ensemble agent round rate sessions)\n";
    for (const auto& row : grid) {
      log << "  " << row.ensemble << ' ' << row.agent.value << ' ' << row.round << ' ' << row.win_rate << ' '
          << row.sessions << '\n';
    }
  }

  if (config.feedback_log) {
    append_feedback_log(*config.feedback_log, reports);
    log << "feedback appended to " << config.feedback_log->string() << '\n';
  }

  if (config.update_pool) {
    if (!config.pool || !manifest) throw Error(ErrorCode::ConfigError, "--update-pool needs --pool and --manifest");
    auto pool = load_pool(*config.pool);
    broker::BrokerMemory memory;
    for (const auto& r : reports) {
      if (r.session_id != manifest->session_id) continue;
      auto profiles = broker::record_feedback(profiles_of(pool.agents), memory, *manifest, r);
      for (std::size_t i = 0; i < pool.agents.size(); ++i) pool.agents[i].profile = profiles[i];
    }
    save_pool(*config.update_pool, pool);
    log << "updated pool written to " << config.update_pool->string() << '\n';
  }
}

namespace {

TemporalKernel kernel_from_flags(const std::string& name, double alpha, double gamma_w) {
  TemporalKernel k;
  k.kind = kernel_kind_from_string(name);
  if (k.kind == KernelKind::linear) k.parameter = alpha;
  if (k.kind == KernelKind::exponential) k.parameter = gamma_w;
  return k;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Deliberation engine: compose teams, run sessions, fit utility curves."};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string strategy = "history_max";
  double alpha = 0.1;
  double gamma_w = 1.1;

  ComposeConfig compose;
  std::string compose_out = "manifest.json";
  auto* c = app.add_subcommand("compose", "Choose a team and round budget for a task");
  c->add_option("--pool", compose.pool, "Agent pool JSON")->required()->check(CLI::ExistingFile);
  c->add_option("--task", compose.task, "Task profile JSON")->check(CLI::ExistingFile);
  c->add_option("--max-latency", compose.sla.max_latency_s, "SLA: maximum session latency (s)");
  c->add_option("--max-cost", compose.sla.max_cost, "SLA: maximum cost");
  c->add_option("--min-quality", compose.sla.min_quality, "SLA: minimum mean quality prior");
  c->add_option("--lambda", compose.sla.elasticity, "Cost elasticity in the objective");
  c->add_option("--lambda-sweep", compose.lambda_sweep, "Lambda values for a Pareto sweep")->delimiter(',');
  c->add_option("--epsilon", compose.broker.epsilon, "Convergence threshold written to the manifest");
  c->add_option("--rounds", compose.broker.t_search_max, "Largest round budget considered");
  c->add_option("--seed", seed, "Session seed");
  c->add_option("--strategy", strategy, "Consensus strategy")
      ->check(CLI::IsMember({"live", "history_max", "linear", "exponential"}));
  c->add_option("--alpha", alpha, "Linear kernel slope");
  c->add_option("--gamma-w", gamma_w, "Exponential kernel base");
  c->add_option("--out", compose_out, "Manifest output path");
  c->add_option("--memory", compose.memory, "Feedback log used to cap round budgets")->check(CLI::ExistingFile);

  RunConfig sim;
  auto* s = app.add_subcommand("simulate", "Monte Carlo sessions with simulated agents");
  auto add_run_flags = [&](CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--pool", cfg.pool, "Agent pool JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--task", cfg.task, "Task profile JSON")->check(CLI::ExistingFile);
    cmd->add_option("--manifest", cfg.manifest, "Session manifest JSON")->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "Seed");
    cmd->add_option("--rounds", cfg.rounds, "Round budget when no manifest is given")->check(CLI::PositiveNumber);
    cmd->add_option("--epsilon", cfg.epsilon, "Convergence threshold");
    cmd->add_option("--gamma", cfg.gamma_base, "Base retention gamma")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--strategy", strategy, "Consensus strategy")
        ->check(CLI::IsMember({"live", "history_max", "linear", "exponential"}));
    cmd->add_option("--alpha", alpha, "Linear kernel slope");
    cmd->add_option("--gamma-w", gamma_w, "Exponential kernel base");
    cmd->add_option("--timeout", cfg.timeout_s, "Per-agent phase timeout (s)");
    cmd->add_option("--overhead", cfg.overhead_s, "Per-round network overhead (s)");
    cmd->add_option("--out", cfg.out, "Output directory");
    cmd->add_flag("!--serial", cfg.parallel, "Call agents one at a time");
  };
  add_run_flags(s, sim);
  s->add_option("--replications", sim.replications, "Number of simulated tasks")->check(CLI::PositiveNumber);

  RunConfig run;
  run.epsilon = 0.02;
  auto* r = app.add_subcommand("run", "One live session against the configured agents");
  add_run_flags(r, run);
  r->add_option("--max-latency", run.max_latency_s, "Abort when the session exceeds this latency (s)");
  r->add_option("--constraints", run.constraints, "Text file polled between rounds for new constraints");

  FitConfig fit;
  auto* f = app.add_subcommand("fit", "Fit the efficiency-fatigue curve to a trajectory");
  f->add_option("trajectory", fit.trajectory, "CSV with round,accuracy columns")->required()->check(CLI::ExistingFile);
  f->add_option("--p-g", fit.p_g, "Generation precision (round-1 accuracy)")->required();
  f->add_option("--p-v", fit.p_v, "Verification precision");
  f->add_flag("--fit-pv", fit.fit_pv, "Fit the precision gap with Lambda pinned at --efficiency");
  f->add_option("--efficiency", fit.efficiency, "Pinned Lambda for --fit-pv");
  f->add_option("--t-max", fit.t_max, "Horizon for T_opt (default: last observed round)");
  f->add_option("--out", fit.out, "Output directory");

  ReportConfig report;
  auto* rep = app.add_subcommand("report", "Summarize a telemetry bundle");
  rep->add_option("telemetry", report.telemetry, "telemetry.json")->required()->check(CLI::ExistingFile);
  rep->add_option("--manifest", report.manifest, "Manifest for T_opt comparison and feedback")->check(CLI::ExistingFile);
  rep->add_option("--pool", report.pool, "Pool to update with feedback")->check(CLI::ExistingFile);
  rep->add_option("--update-pool", report.update_pool, "Write the feedback-updated pool here");
  rep->add_option("--feedback-log", report.feedback_log, "Append session feedback to this JSON-lines log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const auto kernel = kernel_from_flags(strategy, alpha, gamma_w);
    if (*c) {
      compose.broker.seed = seed;
      compose.broker.strategy = kernel;
      compose.out = compose_out;
      cmd_compose(compose, std::cout);
    } else if (*s) {
      sim.seed = seed;
      sim.strategy = kernel;
      cmd_simulate(sim, std::cout);
    } else if (*r) {
      run.seed = seed;
      run.strategy = kernel;
      cmd_run(run, std::cout);
    } else if (*f) {
      cmd_fit(fit, std::cout);
    } else if (*rep) {
      cmd_report(report, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}

}  // namespace nsed::cli

#include "nsed/telemetry.hpp"

#include <algorithm>
#include <map>

#include "nsed/broker.hpp"
#include "nsed/csv.hpp"
#include "nsed/json_io.hpp"

namespace nsed::telemetry {

namespace fs = std::filesystem;
using csv::format_double;

double influence_score(const std::vector<RoundEntry>& history, const AgentId& agent) {
  if (history.empty()) throw Error(ErrorCode::EmptyHistory, "influence needs at least one round");
  bool seen = false;
  double total = 0.0;
  for (const auto& entry : history) {
    const auto& labels = entry.votes.labels;
    const auto it = std::find(labels.begin(), labels.end(), agent.value);
    if (it == labels.end()) continue;
    seen = true;
    const auto i = static_cast<std::size_t>(it - labels.begin());
    for (std::size_t j = 0; j < entry.votes.size; ++j) {
      if (j != i) total += entry.votes.at(j, i);
    }
  }
  if (!seen) throw Error(ErrorCode::UnknownAgent, "agent '" + agent.value + "' never took part");
  return total / static_cast<double>(history.size());
}

std::vector<RoundLatency> latency_report(const std::vector<std::vector<orchestrator::AgentTiming>>& rounds,
                                         double overhead_s) {
  std::vector<RoundLatency> out;
  double cumulative = 0.0;
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    RoundLatency row;
    row.round = static_cast<int>(r) + 1;
    for (const auto& t : rounds[r]) {
      row.gen_s = std::max(row.gen_s, t.gen_s);
      row.eval_s = std::max(row.eval_s, t.eval_s);
    }
    row.total_s = row.gen_s + row.eval_s + overhead_s;
    cumulative += row.total_s;
    row.cumulative_s = cumulative;
    out.push_back(row);
  }
  return out;
}

std::vector<RoundLatency> latency_report(const orchestrator::SessionRecord& record, double overhead_s) {
  auto rows = latency_report(record.timings, overhead_s);
  for (std::size_t r = 0; r < rows.size() && r < record.rounds.size(); ++r) rows[r].round = record.rounds[r].round;
  return rows;
}

InfluenceReport build_report(const orchestrator::SessionRecord& record, double overhead_s) {
  InfluenceReport report;
  report.session_id = record.manifest.session_id;
  report.ensemble = broker::ensemble_key(record.manifest.agents);
  report.agents = record.manifest.agents;
  for (const auto& swap : record.swaps) {
    if (std::find(report.agents.begin(), report.agents.end(), swap.replacement) == report.agents.end()) {
      report.agents.push_back(swap.replacement);
    }
  }
  // Defensive: any author not yet listed (should not happen with a valid record).
  for (const auto& entry : record.history) {
    for (const auto& label : entry.votes.labels) {
      if (std::find(report.agents.begin(), report.agents.end(), AgentId{label}) == report.agents.end()) {
        report.agents.push_back(AgentId{label});
      }
    }
  }

  const std::size_t n = report.agents.size();
  const auto index_of = [&](const std::string& label) {
    return static_cast<std::size_t>(std::find(report.agents.begin(), report.agents.end(), AgentId{label}) -
                                    report.agents.begin());
  };

  report.rounds = static_cast<int>(record.history.size());
  report.influence.assign(n, std::vector<double>(n, 0.0));
  report.wins.assign(n, std::vector<double>(record.history.size(), 0.0));
  for (std::size_t r = 0; r < record.history.size(); ++r) {
    const auto& entry = record.history[r];
    const auto& votes = entry.votes;
    for (std::size_t j = 0; j < votes.size; ++j) {
      for (std::size_t i = 0; i < votes.size; ++i) {
        if (i == j) continue;
        report.influence[index_of(votes.labels[j])][index_of(votes.labels[i])] += votes.at(j, i);
      }
    }
    report.wins[index_of(entry.proposals.at(entry.winner).author.value)][r] = 1.0;
  }
  const double rounds = std::max<double>(1.0, static_cast<double>(record.history.size()));
  report.influence_score.assign(n, 0.0);
  report.vote_share.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      report.influence[j][i] /= rounds;
      report.influence_score[i] += report.influence[j][i];
    }
  }
  const double peers = record.manifest.agents.size() > 1 ? static_cast<double>(record.manifest.agents.size() - 1) : 1.0;
  for (std::size_t i = 0; i < n; ++i) report.vote_share[i] = std::clamp(report.influence_score[i] / peers, 0.0, 1.0);

  report.latency = latency_report(record, overhead_s);
  report.halt_reason = record.halt_reason;
  if (record.halt_reason == consensus::HaltReason::Converged && !record.rounds.empty()) {
    report.convergence_round = record.rounds.back().round;
  }
  report.swaps = record.swaps;
  return report;
}

std::vector<WinRateRow> win_rate_matrix(const std::vector<InfluenceReport>& sessions) {
  struct Tally {
    std::map<int, int> reached;                         // round -> sessions
    std::map<AgentId, std::map<int, int>> wins;         // agent -> round -> wins
  };
  std::map<std::string, Tally> by_ensemble;
  for (const auto& s : sessions) {
    auto& tally = by_ensemble[s.ensemble];
    for (int r = 1; r <= s.rounds; ++r) ++tally.reached[r];
    for (std::size_t a = 0; a < s.agents.size(); ++a) {
      auto& row = tally.wins[s.agents[a]];
      for (int r = 1; r <= s.rounds; ++r) {
        const bool won = a < s.wins.size() && static_cast<std::size_t>(r - 1) < s.wins[a].size() &&
                         s.wins[a][static_cast<std::size_t>(r - 1)] > 0.0;
        row[r] += won ? 1 : 0;
      }
    }
  }
  std::vector<WinRateRow> out;
  for (const auto& [ensemble, tally] : by_ensemble) {
    for (const auto& [agent, rounds] : tally.wins) {
      for (const auto& [round, wins] : rounds) {
        const int reached = tally.reached.at(round);
        out.push_back({ensemble, agent, round, static_cast<double>(wins) / reached, reached});
      }
    }
  }
  return out;
}

ExportPaths export_reports(const std::vector<InfluenceReport>& reports, const fs::path& directory, ExportFormat format) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + directory.string() + ": " + ec.message());

  ExportPaths paths;
  if (format != ExportFormat::json) {
    paths.influence_csv = directory / "influence.csv";
    paths.win_rate_csv = directory / "win_rate.csv";
    paths.latency_csv = directory / "latency.csv";

    std::vector<csv::Row> influence{{"session_id", "voter", "proposer", "vote_share"}};
    std::vector<csv::Row> latency{{"session_id", "round", "gen_s", "eval_s", "total_s", "cumulative_s"}};
    for (const auto& r : reports) {
      for (std::size_t j = 0; j < r.agents.size(); ++j) {
        for (std::size_t i = 0; i < r.agents.size(); ++i) {
          influence.push_back({r.session_id, r.agents[j].value, r.agents[i].value, format_double(r.influence[j][i])});
        }
      }
      for (const auto& row : r.latency) {
        latency.push_back({r.session_id, std::to_string(row.round), format_double(row.gen_s), format_double(row.eval_s),
                           format_double(row.total_s), format_double(row.cumulative_s)});
      }
    }
    std::vector<csv::Row> win_rate{{"ensemble", "agent", "round", "win_rate", "sessions"}};
    for (const auto& row : win_rate_matrix(reports)) {
      win_rate.push_back({row.ensemble, row.agent.value, std::to_string(row.round), format_double(row.win_rate),
                          std::to_string(row.sessions)});
    }
    csv::write_file(paths.influence_csv, influence);
    csv::write_file(paths.win_rate_csv, win_rate);
    csv::write_file(paths.latency_csv, latency);
  }
  if (format != ExportFormat::csv) {
    paths.bundle_json = directory / "telemetry.json";
    json_io::write_file(paths.bundle_json, nlohmann::json{{"reports", reports}});
  }
  return paths;
}

std::vector<InfluenceReport> import_bundle(const fs::path& bundle_json) {
  const auto j = json_io::read_file(bundle_json);
  try {
    return j.at("reports").get<std::vector<InfluenceReport>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, bundle_json.string() + ": " + e.what());
  }
}

std::vector<InfluenceReport> import_csv(const fs::path& directory) {
  std::vector<InfluenceReport> reports;
  auto report_for = [&](const std::string& session) -> InfluenceReport& {
    for (auto& r : reports) {
      if (r.session_id == session) return r;
    }
    reports.push_back({});
    reports.back().session_id = session;
    return reports.back();
  };

  const auto influence = csv::read_file(directory / "influence.csv");
  for (std::size_t k = 1; k < influence.size(); ++k) {
    const auto& row = influence[k];
    if (row.size() != 4) throw Error(ErrorCode::IoError, "influence.csv: expected 4 columns");
    auto& r = report_for(row[0]);
    for (const auto* name : {&row[1], &row[2]}) {
      if (std::find(r.agents.begin(), r.agents.end(), AgentId{*name}) == r.agents.end()) r.agents.push_back({*name});
    }
  }
  for (auto& r : reports) r.influence.assign(r.agents.size(), std::vector<double>(r.agents.size(), 0.0));
  for (std::size_t k = 1; k < influence.size(); ++k) {
    const auto& row = influence[k];
    auto& r = report_for(row[0]);
    const auto pos = [&](const std::string& name) {
      return static_cast<std::size_t>(std::find(r.agents.begin(), r.agents.end(), AgentId{name}) - r.agents.begin());
    };
    r.influence[pos(row[1])][pos(row[2])] = csv::parse_double(row[3]);
  }

  const auto latency = csv::read_file(directory / "latency.csv");
  for (std::size_t k = 1; k < latency.size(); ++k) {
    const auto& row = latency[k];
    if (row.size() != 6) throw Error(ErrorCode::IoError, "latency.csv: expected 6 columns");
    auto& r = report_for(row[0]);
    r.latency.push_back({std::stoi(row[1]), csv::parse_double(row[2]), csv::parse_double(row[3]),
                         csv::parse_double(row[4]), csv::parse_double(row[5])});
  }
  return reports;
}

}  // namespace nsed::telemetry

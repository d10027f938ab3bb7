#include "nsed/thermo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>

namespace nsed::thermo {

void validate_trajectory(const Trajectory& trajectory) {
  int previous = 0;
  for (const auto& p : trajectory.points) {
    if (p.round < 1) throw Error(ErrorCode::InvalidTrajectory, "rounds start at 1");
    if (p.round <= previous) throw Error(ErrorCode::InvalidTrajectory, "rounds must be strictly increasing");
    if (!(p.accuracy >= 0.0 && p.accuracy <= 1.0)) {
      throw Error(ErrorCode::InvalidTrajectory, "accuracy must lie in [0,1]");
    }
    previous = p.round;
  }
}

double utility(double t, const ThermoParams& p) {
  if (t < 1.0) throw Error(ErrorCode::InvalidRound, "round must be >= 1");
  const double s = t - 1.0;
  return p.p_g - (1.0 - p.p_g) * std::expm1(-p.efficiency * (p.p_v - p.p_g) * s) - p.fatigue * s * s;
}

double utility(int t, const ThermoParams& p) { return utility(static_cast<double>(t), p); }

double r_squared(const Trajectory& trajectory, const ThermoParams& params, bool exclude_first) {
  const auto first = trajectory.points.begin() + (exclude_first ? 1 : 0);
  const auto last = trajectory.points.end();
  if (first >= last) return 0.0;
  double mean = 0.0;
  for (auto it = first; it != last; ++it) mean += it->accuracy;
  mean /= static_cast<double>(last - first);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (auto it = first; it != last; ++it) {
    const double r = it->accuracy - utility(it->round, params);
    ss_res += r * r;
    ss_tot += (it->accuracy - mean) * (it->accuracy - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

namespace {

struct Box {
  std::array<double, 2> lo;
  std::array<double, 2> hi;
  std::array<int, 2> grid;
};

// Coarse grid followed by compass search with step halving.
std::array<double, 2> minimize(const std::function<double(const std::array<double, 2>&)>& sse, const Box& box,
                               double tolerance) {
  std::array<double, 2> best{box.lo[0], box.lo[1]};
  double best_value = sse(best);
  std::array<double, 2> spacing{};
  for (int d = 0; d < 2; ++d) spacing[d] = (box.hi[d] - box.lo[d]) / std::max(1, box.grid[d] - 1);

  for (int i = 0; i < box.grid[0]; ++i) {
    for (int j = 0; j < box.grid[1]; ++j) {
      const std::array<double, 2> x{box.lo[0] + i * spacing[0], box.lo[1] + j * spacing[1]};
      const double v = sse(x);
      if (v < best_value) {
        best_value = v;
        best = x;
      }
    }
  }

  std::array<double, 2> step = spacing;
  std::array<double, 2> min_step{};
  for (int d = 0; d < 2; ++d) min_step[d] = tolerance * (box.hi[d] - box.lo[d]);

  while (step[0] > min_step[0] || step[1] > min_step[1]) {
    bool improved = false;
    for (int d = 0; d < 2; ++d) {
      if (step[d] <= min_step[d]) continue;
      for (double dir : {1.0, -1.0}) {
        auto x = best;
        x[d] = std::clamp(x[d] + dir * step[d], box.lo[d], box.hi[d]);
        const double v = sse(x);
        if (v < best_value) {
          best_value = v;
          best = x;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      for (int d = 0; d < 2; ++d) step[d] *= 0.5;
    }
  }
  return best;
}

void check_fit_inputs(const Trajectory& trajectory) {
  validate_trajectory(trajectory);
  if (trajectory.points.size() < 4) {
    throw Error(ErrorCode::InsufficientData, "need at least 4 points, got " + std::to_string(trajectory.points.size()));
  }
  const double first = trajectory.points.front().accuracy;
  const bool flat = std::all_of(trajectory.points.begin(), trajectory.points.end(),
                                [first](const TrajectoryPoint& p) { return p.accuracy == first; });
  if (flat) throw Error(ErrorCode::DegenerateVariance, "all accuracies are equal");
}

double sum_squared_residuals(const Trajectory& trajectory, const ThermoParams& params) {
  double ss = 0.0;
  for (const auto& p : trajectory.points) {
    const double r = p.accuracy - utility(p.round, params);
    ss += r * r;
  }
  return ss;
}

void finish(const Trajectory& trajectory, ThermoParams& params) {
  params.r_squared = r_squared(trajectory, params, false);
  params.r_squared_excl_first = r_squared(trajectory, params, true);
  params.t_opt = optimal_stop(params, trajectory.points.back().round);
}

}  // namespace

ThermoParams fit(const Trajectory& trajectory, double p_g, double p_v, const FitOptions& options) {
  check_fit_inputs(trajectory);
  if (!(p_v > p_g)) throw Error(ErrorCode::PreconditionViolated, "fit requires p_v > p_g");

  ThermoParams params;
  params.p_g = p_g;
  params.p_v = p_v;
  const Box box{{options.efficiency_min, options.fatigue_min},
                {options.efficiency_max, options.fatigue_max},
                {options.grid_efficiency, options.grid_fatigue}};
  const auto best = minimize(
      [&](const std::array<double, 2>& x) {
        ThermoParams trial = params;
        trial.efficiency = x[0];
        trial.fatigue = x[1];
        return sum_squared_residuals(trajectory, trial);
      },
      box, options.tolerance);
  params.efficiency = best[0];
  params.fatigue = best[1];
  finish(trajectory, params);
  return params;
}

ThermoParams fit_with_pv(const Trajectory& trajectory, double p_g, double efficiency, const FitOptions& options) {
  check_fit_inputs(trajectory);
  if (!(efficiency > 0.0)) throw Error(ErrorCode::PreconditionViolated, "efficiency must be > 0");
  if (!(p_g < 1.0)) throw Error(ErrorCode::PreconditionViolated, "p_g must be < 1 to leave room for p_v");

  ThermoParams params;
  params.p_g = p_g;
  params.efficiency = efficiency;
  const double gap_max = 1.0 - p_g;
  const Box box{{gap_max * 1e-4, options.fatigue_min},
                {gap_max, options.fatigue_max},
                {options.grid_efficiency, options.grid_fatigue}};
  const auto best = minimize(
      [&](const std::array<double, 2>& x) {
        ThermoParams trial = params;
        trial.p_v = p_g + x[0];
        trial.fatigue = x[1];
        return sum_squared_residuals(trajectory, trial);
      },
      box, options.tolerance);
  params.p_v = p_g + best[0];
  params.fatigue = best[1];
  finish(trajectory, params);
  return params;
}

int optimal_stop(const ThermoParams& params, int t_max) {
  if (t_max < 1) throw Error(ErrorCode::PreconditionViolated, "t_max must be >= 1");
  int best = 1;
  double best_value = utility(1, params);
  for (int t = 2; t <= t_max; ++t) {
    const double v = utility(t, params);
    if (v > best_value) {
      best_value = v;
      best = t;
    }
  }
  return best;
}

double decay_policy(int t, int t_opt, double gamma_base) {
  if (!(gamma_base >= 0.0 && gamma_base <= 1.0)) throw Error(ErrorCode::GammaOutOfRange, "gamma_base must lie in [0,1]");
  return t < t_opt ? gamma_base : 0.0;
}

bool condorcet_gate(double p_v_mean) { return p_v_mean > 0.5; }

}  // namespace nsed::thermo

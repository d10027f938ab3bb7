#pragma once

#include <vector>

#include "nsed/core_types.hpp"

namespace nsed::thermo {

struct TrajectoryPoint {
  int round = 1;
  double accuracy = 0.0;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

/// Observed accuracy per round. Rounds strictly increasing, accuracies in [0,1].
struct Trajectory {
  std::vector<TrajectoryPoint> points;
};

void validate_trajectory(const Trajectory& trajectory);

/// Efficiency-fatigue utility with the round-1 offset:
///   U(t) = 1 - (1 - p_g) exp(-Lambda (p_v - p_g) (t - 1)) - beta (t - 1)^2
/// so U(1) = p_g.
double utility(int t, const ThermoParams& params);
double utility(double t, const ThermoParams& params);

struct FitOptions {
  double efficiency_min = 0.1;
  double efficiency_max = 20.0;
  double fatigue_min = 0.0;
  double fatigue_max = 0.05;
  int grid_efficiency = 200;
  int grid_fatigue = 101;
  double tolerance = 1e-6;  // relative step size at which refinement stops
};

/// Least-squares fit of (Lambda, beta) for fixed p_g, p_v. The result also
/// carries R^2 over all points, R^2 excluding the first point, and T_opt over
/// the trajectory's last round.
ThermoParams fit(const Trajectory& trajectory, double p_g, double p_v, const FitOptions& options = {});

/// Variant that fits (p_v, beta) with Lambda held at `efficiency`. Lambda and
/// the gap p_v - p_g enter only as a product, so one of them must be pinned.
ThermoParams fit_with_pv(const Trajectory& trajectory, double p_g, double efficiency,
                         const FitOptions& options = {});

double r_squared(const Trajectory& trajectory, const ThermoParams& params, bool exclude_first = false);

/// argmax over integer t in [1, t_max] of utility; ties go to the smaller t.
int optimal_stop(const ThermoParams& params, int t_max);

/// gamma(t) = gamma_base * I(t < t_opt).
double decay_policy(int t, int t_opt, double gamma_base);

/// True iff the mean verifier precision strictly exceeds chance.
bool condorcet_gate(double p_v_mean);

}  // namespace nsed::thermo

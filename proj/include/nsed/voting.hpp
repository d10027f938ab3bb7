#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nsed/core_types.hpp"

namespace nsed::voting {

inline constexpr double kDefaultVoteBudget = 100.0;

/// Budget-clamped quadratic activation of one evaluator's raw vote row:
///   sigma(v_i) = sqrt(min(v_i, v_i / sum(v) * budget)) / sqrt(budget)
/// An all-zero row maps to all zeros. Output lies in [0,1].
std::vector<double> qv_activate(std::span<const double> votes, double budget = kDefaultVoteBudget);

/// Copy of `votes` with the diagonal zeroed.
VoteMatrix apply_diagonal_mask(const VoteMatrix& votes);

/// s_i = sum_j sign(V[j,i]) * sqrt(|V[j,i]|), column-wise over evaluators.
std::vector<double> quadratic_aggregate(const VoteMatrix& votes);

/// Maps a raw [0,100] score to [0,1] for matrix storage.
double normalize_score(double raw);

/// Population variance of column k with the diagonal excluded.
double controversy_score(const VoteMatrix& votes, std::size_t k);

/// Per-candidate confidence: mean over the other evaluators of the
/// qv_activate output of their full raw row (budget spent before masking).
std::vector<double> qv_confidence(const VoteMatrix& raw_scores, double budget = kDefaultVoteBudget);

}  // namespace nsed::voting

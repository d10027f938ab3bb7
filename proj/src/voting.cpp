#include "nsed/voting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nsed::voting {

namespace {

void require_square(const VoteMatrix& votes) {
  if (votes.entries.size() != votes.size * votes.size) {
    throw Error(ErrorCode::NonSquareMatrix, "vote matrix has " + std::to_string(votes.entries.size()) +
                                                " entries for size " + std::to_string(votes.size));
  }
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

std::vector<double> qv_activate(std::span<const double> votes, double budget) {
  if (!(budget > 0.0)) throw Error(ErrorCode::NonPositiveBudget, "vote budget must be > 0");
  for (double v : votes) {
    if (v < 0.0) throw Error(ErrorCode::NegativeVote, "vote " + std::to_string(v) + " is negative");
    if (!(v <= 100.0)) throw Error(ErrorCode::OutOfRange, "vote " + std::to_string(v) + " exceeds 100");
  }
  const double total = std::accumulate(votes.begin(), votes.end(), 0.0);
  std::vector<double> out(votes.size(), 0.0);
  if (total == 0.0) return out;
  const double scale = std::sqrt(budget);
  for (std::size_t i = 0; i < votes.size(); ++i) {
    const double spent = std::min(votes[i], votes[i] / total * budget);
    out[i] = std::min(1.0, std::sqrt(spent) / scale);
  }
  return out;
}

VoteMatrix apply_diagonal_mask(const VoteMatrix& votes) {
  require_square(votes);
  VoteMatrix masked = votes;
  for (std::size_t i = 0; i < masked.size; ++i) masked.at(i, i) = 0.0;
  return masked;
}

std::vector<double> quadratic_aggregate(const VoteMatrix& votes) {
  require_square(votes);
  std::vector<double> scores(votes.size, 0.0);
  for (std::size_t j = 0; j < votes.size; ++j) {
    for (std::size_t i = 0; i < votes.size; ++i) {
      const double v = votes.at(j, i);
      scores[i] += sign(v) * std::sqrt(std::abs(v));
    }
  }
  return scores;
}

double normalize_score(double raw) {
  if (!(raw >= 0.0 && raw <= 100.0)) throw Error(ErrorCode::OutOfRange, "raw score must lie in [0,100]");
  return raw / 100.0;
}

double controversy_score(const VoteMatrix& votes, std::size_t k) {
  require_square(votes);
  if (k >= votes.size) throw Error(ErrorCode::IndexOutOfRange, "column " + std::to_string(k));
  std::vector<double> column;
  for (std::size_t j = 0; j < votes.size; ++j) {
    if (j != k) column.push_back(votes.at(j, k));
  }
  if (column.empty()) return 0.0;
  const double mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(column.size());
  double ss = 0.0;
  for (double v : column) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(column.size());
}

std::vector<double> qv_confidence(const VoteMatrix& raw_scores, double budget) {
  require_square(raw_scores);
  const std::size_t n = raw_scores.size;
  std::vector<double> sum(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    std::span<const double> row(raw_scores.entries.data() + j * n, n);
    const auto activated = qv_activate(row, budget);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j) sum[i] += activated[i];
    }
  }
  if (n > 1) {
    for (double& s : sum) s /= static_cast<double>(n - 1);
  }
  return sum;
}

}  // namespace nsed::voting

#pragma once

#include <span>
#include <utility>
#include <vector>

namespace casa {

/// sqrt(mean(wrap(est - truth)^2)) over matched pairs, in degrees.
/// Throws ConfigError on empty or mismatched input.
double circular_rmse_deg(std::span<const double> estimates,
                         std::span<const double> truths);

/// Permutation p minimizing sum_i wrap(est[p[i]] - truth[i])^2, brute force
/// over all permutations (intended for C <= 4).  Ties resolve to the
/// lexicographically smallest permutation.
std::vector<int> match_streams(std::span<const double> estimated_means,
                               std::span<const double> true_azimuths);

/// Percentage of wrong decisions; a decision of -1 (no decision) counts as
/// wrong.  Pairs are (decided class, true class).
double classification_error_rate(std::span<const std::pair<int, int>> decisions);

}  // namespace casa

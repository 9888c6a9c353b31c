#include "casa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "casa/angles.hpp"
#include "casa/errors.hpp"

namespace casa {

double circular_rmse_deg(std::span<const double> estimates,
                         std::span<const double> truths) {
  if (estimates.empty()) throw ConfigError("circular_rmse: empty input");
  if (estimates.size() != truths.size()) {
    throw ConfigError("circular_rmse: size mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double e = angle_diff(estimates[i], truths[i]);
    acc += e * e;
  }
  return rad_to_deg(std::sqrt(acc / estimates.size()));
}

std::vector<int> match_streams(std::span<const double> estimated_means,
                               std::span<const double> true_azimuths) {
  const int n = static_cast<int>(estimated_means.size());
  if (static_cast<int>(true_azimuths.size()) != n) {
    throw ConfigError("match_streams: size mismatch");
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int i = 0; i < n; ++i) {
      const double e = angle_diff(estimated_means[perm[i]], true_azimuths[i]);
      cost += e * e;
    }
    if (cost < best_cost) {  // strict: keeps the lexicographically first tie
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double classification_error_rate(std::span<const std::pair<int, int>> decisions) {
  if (decisions.empty()) throw ConfigError("classification_error_rate: empty input");
  int wrong = 0;
  for (const auto& [decided, truth] : decisions) {
    if (decided != truth) ++wrong;
  }
  return 100.0 * wrong / static_cast<double>(decisions.size());
}

}  // namespace casa

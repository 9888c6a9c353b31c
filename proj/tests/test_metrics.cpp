#include <doctest.h>

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "casa/angles.hpp"
#include "casa/errors.hpp"
#include "casa/metrics.hpp"
#include "oracles.hpp"

using namespace casa;

TEST_CASE("circular RMSE basic values") {
  std::vector<double> est{deg_to_rad(10.0), deg_to_rad(50.0)};
  CHECK(circular_rmse_deg(est, est) == doctest::Approx(0.0));

  // 350 vs 10 degrees: the wrapped error is 20 degrees, not 340.
  std::vector<double> a{deg_to_rad(350.0)};
  std::vector<double> b{deg_to_rad(10.0)};
  CHECK(circular_rmse_deg(a, b) == doctest::Approx(20.0).epsilon(1e-12));

  // Errors of +10 and -10 degrees give an RMSE of 10, not 0.
  std::vector<double> est2{deg_to_rad(10.0), deg_to_rad(-10.0)};
  std::vector<double> tru2{0.0, 0.0};
  CHECK(circular_rmse_deg(est2, tru2) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("circular RMSE rejects bad input") {
  std::vector<double> one{0.0};
  std::vector<double> two{0.0, 1.0};
  std::vector<double> none;
  CHECK_THROWS_AS(circular_rmse_deg(none, none), ConfigError);
  CHECK_THROWS_AS(circular_rmse_deg(one, two), ConfigError);
}

TEST_CASE("circular RMSE properties on random data") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(-kPi, kPi);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> est(5), tru(5);
    for (int i = 0; i < 5; ++i) {
      est[i] = uni(rng);
      tru[i] = uni(rng);
    }
    const double r = circular_rmse_deg(est, tru);
    CHECK(r >= 0.0);
    CHECK(r <= 180.0 + 1e-9);
    // Symmetric in its arguments and invariant to a full-turn shift.
    CHECK(circular_rmse_deg(tru, est) == doctest::Approx(r).epsilon(1e-12));
    auto shifted = est;
    for (double& v : shifted) v += kTwoPi;
    CHECK(circular_rmse_deg(shifted, tru) == doctest::Approx(r).epsilon(1e-9));
  }
}

TEST_CASE("stream matching equals the brute-force optimum") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uni(-kPi, kPi);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> est(4), tru(4);
    for (int i = 0; i < 4; ++i) {
      est[i] = uni(rng);
      tru[i] = uni(rng);
    }
    const auto perm = match_streams(est, tru);
    REQUIRE(perm.size() == 4);

    double got = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double e = angle_diff(est[perm[i]], tru[i]);
      got += e * e;
    }
    double best = 1e300;
    std::vector<std::vector<int>> perms;
    oracle::all_permutations(4, perms);
    for (const auto& p : perms) {
      double cost = 0.0;
      for (int i = 0; i < 4; ++i) {
        const double e = angle_diff(est[p[i]], tru[i]);
        cost += e * e;
      }
      best = std::min(best, cost);
    }
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("stream matching handles small and degenerate cases") {
  std::vector<double> single_est{deg_to_rad(42.0)};
  std::vector<double> single_tru{deg_to_rad(40.0)};
  CHECK(match_streams(single_est, single_tru) == std::vector<int>{0});

  // Clearly separated pair must cross-match.
  std::vector<double> est{deg_to_rad(150.0), deg_to_rad(30.0)};
  std::vector<double> tru{deg_to_rad(30.0), deg_to_rad(150.0)};
  CHECK(match_streams(est, tru) == std::vector<int>{1, 0});

  // All estimates identical: every permutation ties, the lexicographically
  // smallest one wins.
  std::vector<double> same{1.0, 1.0, 1.0};
  std::vector<double> tru3{0.0, 2.0, -2.0};
  CHECK(match_streams(same, tru3) == std::vector<int>{0, 1, 2});
}

TEST_CASE("classification error rate counts no-decisions as wrong") {
  std::vector<std::pair<int, int>> all_right{{0, 0}, {3, 3}};
  CHECK(classification_error_rate(all_right) == doctest::Approx(0.0));

  std::vector<std::pair<int, int>> half{{0, 0}, {1, 2}};
  CHECK(classification_error_rate(half) == doctest::Approx(50.0));

  std::vector<std::pair<int, int>> with_abstain{{-1, 0}, {0, 0}, {2, 2}, {-1, 4}};
  CHECK(classification_error_rate(with_abstain) == doctest::Approx(50.0));

  std::vector<std::pair<int, int>> none;
  CHECK_THROWS_AS(classification_error_rate(none), ConfigError);
}

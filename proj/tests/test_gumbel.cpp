#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "preflab/gumbel.hpp"

using namespace preflab;

TEST_CASE("sample_gumbel moments match the closed-form mean and variance") {
  const std::size_t n = 1'000'000;
  const double location = 0.7;
  auto draws = sample_gumbel(location, 321, n);
  REQUIRE(draws.size() == n);

  double mean = 0.0;
  for (double g : draws) mean += g;
  mean /= static_cast<double>(n);
  // Gumbel(mu, 1) mean is mu + Euler-Mascheroni; 3 sigma with var pi^2/6.
  const double euler_mascheroni = 0.57721566490153286;
  const double var = std::numbers::pi * std::numbers::pi / 6.0;
  REQUIRE(std::abs(mean - (location + euler_mascheroni)) <
          3.0 * std::sqrt(var / static_cast<double>(n)) + 1e-12);

  double ss = 0.0;
  for (double g : draws) ss += (g - mean) * (g - mean);
  const double sample_var = ss / static_cast<double>(n - 1);
  REQUIRE(std::abs(sample_var - var) / var < 0.01);
}

TEST_CASE("sample_gumbel is deterministic per seed") {
  auto a = sample_gumbel(1.5, 99, 1000);
  auto b = sample_gumbel(1.5, 99, 1000);
  REQUIRE(a == b);
  auto c = sample_gumbel(1.5, 100, 1000);
  REQUIRE(a != c);
}

TEST_CASE("logistic_exceedance worked values") {
  REQUIRE(logistic_exceedance(1.0, 1.0) == 0.5);
  REQUIRE(logistic_exceedance(1.0, 0.0) == Catch::Approx(0.731059).margin(5e-7));
  REQUIRE(logistic_exceedance(0.0, 1.0) == Catch::Approx(0.268941).margin(5e-7));

  Rng rng = make_rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double g = 5.0 * normal_unit(rng);
    const double t = 5.0 * normal_unit(rng);
    REQUIRE(std::abs(logistic_exceedance(g, t) + logistic_exceedance(-g, -t) -
                     1.0) <= 1e-15);
  }
}

TEST_CASE("verify_theorem1 matches Bradley-Terry within 3 sigma") {
  const std::int64_t n = 1'000'000;
  auto v1 = verify_theorem1(1.0, 0.0, n, 7);
  REQUIRE(v1.analytic == Catch::Approx(0.731059).margin(5e-7));
  REQUIRE(v1.pass());
  REQUIRE(v1.three_sigma == Catch::Approx(0.00133).margin(2e-5));

  auto v2 = verify_theorem1(0.0, 0.0, n, 8);
  REQUIRE(v2.analytic == 0.5);
  REQUIRE(v2.pass());
  REQUIRE(v2.three_sigma == Catch::Approx(0.0015).margin(1e-6));

  auto v3 = verify_theorem1(5.0, 0.0, n, 9);
  REQUIRE(v3.analytic == Catch::Approx(0.993307).margin(5e-7));
  REQUIRE(v3.pass());
  REQUIRE(v3.three_sigma == Catch::Approx(0.00025).margin(2e-5));
}

TEST_CASE("verify_theorem2 worked configurations") {
  const std::int64_t n = 1'000'000;
  auto at_mean = verify_theorem2(1.0, 0.0, 1.0, n, 11);
  REQUIRE(at_mean.analytic == 0.5);
  REQUIRE(at_mean.pass());

  // Zero offset collapses to Theorem 1, bit for bit.
  auto t2 = verify_theorem2(1.0, 0.0, 0.0, n, 12);
  auto t1 = verify_theorem1(1.0, 0.0, n, 12);
  REQUIRE(t2.empirical == t1.empirical);
  REQUIRE(t2.analytic == t1.analytic);

  auto tail = verify_theorem2(0.0, 0.0, 2.0, n, 13);
  REQUIRE(tail.analytic == Catch::Approx(0.119203).margin(5e-7));
  REQUIRE(tail.pass());
}

TEST_CASE("verify_* reject undersized sample counts") {
  REQUIRE_THROWS_AS(verify_theorem1(1.0, 0.0, 1000, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(verify_theorem2(1.0, 0.0, 0.5, 9999, 1),
                    std::invalid_argument);
}

TEST_CASE("verdict bookkeeping is internally consistent") {
  auto v = verify_theorem2(0.8, -0.2, 0.3, 20000, 5);
  REQUIRE(v.n_samples == 20000);
  REQUIRE(v.abs_error == Catch::Approx(std::abs(v.empirical - v.analytic)));
  REQUIRE(v.three_sigma ==
          Catch::Approx(3.0 * std::sqrt(v.analytic * (1.0 - v.analytic) /
                                        20000.0)));
}

TEST_CASE("randomized grid passes with the retry policy") {
  Rng rng = make_rng(20260809);
  const std::int64_t n = 200'000;  // smaller n in unit tests; acceptance uses 1e6
  for (int i = 0; i < 20; ++i) {
    const double gap = 4.0 * (uniform_unit(rng) - 0.5);
    const double delta = 4.0 * (uniform_unit(rng) - 0.5);
    TheoremCase c{2, gap, 0.0, delta};
    auto out = verify_case_with_retry(c, n, derive_seed(77, i));
    INFO("gap=" << gap << " delta=" << delta
                << " attempts=" << out.attempts);
    REQUIRE(out.verdict.pass());
  }
}

TEST_CASE("default verification grid has 20 cases across both theorems") {
  auto grid = default_verification_grid();
  REQUIRE(grid.size() == 20);
  int t1 = 0, t2 = 0;
  for (const auto& c : grid) (c.theorem == 1 ? t1 : t2)++;
  REQUIRE(t1 == 10);
  REQUIRE(t2 == 10);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "besselgap/error.hpp"
#include "besselgap/lue.hpp"
#include "oracles.hpp"

using namespace besselgap;

TEST_SUITE("lue") {
  TEST_CASE("finite-n determinant against the Hankel ratio in 50 digits") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
      const int n = 1 + trial;
      const double alpha = trial % 2 ? 1.5 : 0.0;
      const std::vector<double> lam{0.5 + U(gen), 2.0 + 3.0 * U(gen)};
      const std::vector<double> s{U(gen), U(gen)};
      const double ref = oracle::hankel_ratio(n, alpha, lam, s);
      CAPTURE(n);
      CHECK(lue_genfn(LueModel::make(n, alpha), lam, s).value() == doctest::Approx(ref).epsilon(1e-10));
      CHECK(hankel_ratio(n, alpha, lam, s).value == doctest::Approx(ref).epsilon(1e-12));
    }
    // frozen from oracle::hankel_ratio(6, 0, {0.5, 2}, {0.2, 0.6})
    CHECK(hankel_ratio(6, 0.0, {0.5, 2.0}, {0.2, 0.6}).value == doctest::Approx(0.118260342589546).epsilon(1e-12));
  }

  TEST_CASE("n = 1 is an incomplete gamma function") {
    const double alpha = 0.7, lam = 1.3;
    // F_1 = 1 - P(alpha + 1, lam) for a gap on (0, lam)
    CHECK(lue_genfn(LueModel::make(1, alpha), {lam}, {0.0}).value() ==
          doctest::Approx(1.0 - reg_lower_gamma(alpha + 1.0, lam)).epsilon(1e-12));
  }

  TEST_CASE("moments of the unperturbed weight") {
    const auto mom = JumpWeightMoments::make(3, 0.5, {1.0}, {1.0});
    for (int m = 0; m <= 4; ++m)
      CHECK(static_cast<double>(mom.mu(m)) == doctest::Approx(gamma_fn(m + 1.5)).epsilon(1e-14));
  }

  TEST_CASE("conditioning guard") { CHECK_THROWS_AS(hankel_ratio(kHankelMaxN + 1, 0.0, {1.0}, {0.0}), ValidationError); }

  TEST_CASE("sampler") {
    const auto a = sample_spectrum(30, 1.0, 42), b = sample_spectrum(30, 1.0, 42);
    CHECK(a == b);
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(a.front() > 0.0);
    // E tr W = n (n + alpha) for W = X X^*
    const int n = 20, draws = 2000;
    const double alpha = 1.0;
    double mean = 0.0, sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      const auto ev = sample_spectrum(n, alpha, 100 + i);
      double tr = 0.0;
      for (double e : ev) tr += e;
      mean += tr / draws;
      sq += tr * tr / draws;
    }
    const double se = std::sqrt((sq - mean * mean) / draws);
    CHECK(std::fabs(mean - n * (n + alpha)) < 4.0 * se);
  }
}

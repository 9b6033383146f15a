#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "besselgap/error.hpp"
#include "besselgap/fredholm.hpp"
#include "besselgap/kernels.hpp"
#include "oracles.hpp"

using namespace besselgap;

TEST_SUITE("kernels") {
  TEST_CASE("Bessel kernel against the J' formula in 50 digits") {
    for (double alpha : {-0.5, 0.0, 0.5, 2.0}) {
      const BesselKernelSpec spec{alpha};
      for (double x : {1e-4, 0.3, 1.7, 6.0, 40.0})
        for (double y : {1e-3, 0.3, 2.2, 9.0}) {
          const double ref = oracle::bessel_kernel(alpha, x, y);
          CAPTURE(alpha);
          CAPTURE(x);
          CAPTURE(y);
          CHECK(bessel_kernel(spec, x, y) == doctest::Approx(ref).epsilon(1e-12).scale(1e-3));
        }
    }
  }

  TEST_CASE("symmetric and continuous across the diagonal band") {
    const BesselKernelSpec spec{0.5};
    for (double x : {0.01, 1.0, 25.0}) {
      CHECK(bessel_kernel(spec, x, 2.0 * x) == doctest::Approx(bessel_kernel(spec, 2.0 * x, x)).epsilon(1e-15));
      const double d = bessel_kernel(spec, x, x);
      for (double rel : {1e-7, 1e-5, 1e-3}) {
        // the change is first order in the offset rel * x
        CHECK(std::fabs(bessel_kernel(spec, x, x * (1.0 + rel)) - d) <= rel * std::max(1.0, x) + 1e-13);
      }
    }
  }

  TEST_CASE("gram matches pointwise evaluation") {
    BesselKernel K(BesselKernelSpec{1.0});
    const std::vector<double> u{0.2, 0.2 * (1 + 1e-9), 1.5, 4.0};
    const auto G = K.gram(u);
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j)
        CHECK(G(i, j) == doctest::Approx(K(u[i], u[j])).epsilon(1e-14).scale(1e-3));
  }

  TEST_CASE("invalid kernel parameters") {
    CHECK_THROWS_AS((BesselKernelSpec{-1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((BesselKernelSpec{0.0, 0.0}.validate()), ValidationError);
  }

  TEST_CASE("LUE kernel against the direct sum") {
    const int n = 7;
    const double alpha = 0.5;
    const auto model = LueModel::make(n, alpha);
    for (double x : {0.05, 1.0, 6.0, 14.0})
      for (double y : {0.05, 3.0, 6.0 * (1 + 1e-8), 20.0}) {
        const auto px = laguerre_orthonormal(n, alpha, x), py = laguerre_orthonormal(n, alpha, y);
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += px[j] * py[j];
        const double ref = std::sqrt(std::pow(x * y, alpha) * std::exp(-x - y)) * sum;
        CHECK(lue_kernel(model, x, y) == doctest::Approx(ref).epsilon(1e-11).scale(1e-6));
      }
  }

  TEST_CASE("LUE kernel trace equals n") {
    const auto model = LueModel::make(9, 1.0);
    auto f = [&](double x) { return x == 0.0 ? 0.0 : lue_kernel(model, x, x); };
    const double tr = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-12);
    CHECK(tr == doctest::Approx(9.0).epsilon(1e-10));
  }

  TEST_CASE("hard-edge scaling of the LUE kernel approaches the Bessel kernel") {
    const double alpha = 0.0, x = 1.3, y = 2.9;
    const double target = bessel_kernel(BesselKernelSpec{alpha}, x, y);
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {20, 40, 80, 160}) {
      const auto model = LueModel::make(n, alpha);
      const double err = std::fabs(lue_kernel(model, x / (4.0 * n), y / (4.0 * n)) / (4.0 * n) - target);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 1e-4);
  }

  TEST_CASE("symmetry on random pairs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.01, 30.0);
    const BesselKernelSpec spec{0.7};
    const auto model = LueModel::make(12, 0.7);
    for (int i = 0; i < 1000; ++i) {
      const double x = u(rng), y = u(rng);
      const double a = bessel_kernel(spec, x, y), b = bessel_kernel(spec, y, x);
      CHECK(std::fabs(a - b) <= 1e-10 * std::max(std::fabs(a), 1e-300));
      const double c = lue_kernel(model, x, y), d = lue_kernel(model, y, x);
      CHECK(std::fabs(c - d) <= 1e-10 * std::max(std::fabs(c), 1e-300));
    }
  }

  TEST_CASE("diagonal is positive") {
    for (double alpha : {-0.5, 0.0, 2.0}) {
      const BesselKernelSpec spec{alpha};
      for (int i = 1; i <= 400; ++i) CHECK(bessel_kernel(spec, 0.25 * i, 0.25 * i) > 0.0);
    }
  }

  TEST_CASE("diagonal agrees with the Richardson limit of off-diagonal values") {
    const BesselKernelSpec spec{0.0};
    // the symmetric average is even in h, so one Richardson step removes h^2
    auto avg = [&](double h) { return 0.5 * (bessel_kernel(spec, 1.0, 1.0 + h) + bessel_kernel(spec, 1.0, 1.0 - h)); };
    const double h = 1e-2;
    const double limit = (4.0 * avg(h / 2) - avg(h)) / 3.0;
    CHECK(bessel_kernel(spec, 1.0, 1.0) == doctest::Approx(limit).epsilon(1e-9));
  }

  TEST_CASE("integrated diagonal is minus the s-derivative of F at s = 1") {
    auto diag = [](double t) { return bessel_kernel(BesselKernelSpec{0.0}, t, t); };
    const double mean = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(diag, 0.0, 1.0, 15, 1e-14);
    // F(1, s) = det(1 - (1 - s) K) is a polynomial-like entire function of s;
    // a central difference with h = 1e-3 is accurate to about h^2.
    const double h = 1e-3;
    const double fp = generating_fn(ParameterSet{0.0, {1.0}, {1.0 + h}, 1.0}).value();
    const double fm = generating_fn(ParameterSet{0.0, {1.0}, {1.0 - h}, 1.0}).value();
    CHECK(std::fabs(-(fp - fm) / (2.0 * h) + mean) <= 1e-6);
  }

  TEST_CASE("hard-edge scaling on a fixed grid improves with n") {
    const double alpha = 0.0;
    const BesselKernelSpec spec{alpha};
    const std::vector<std::pair<double, double>> grid = {{0.5, 0.5}, {0.5, 2.0}, {1.0, 2.0}, {1.0, 4.0}, {2.0, 2.0},
                                                         {2.0, 7.0}, {3.0, 5.0}, {4.0, 4.0}, {6.0, 9.0}, {9.0, 9.0}};
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {25, 50, 100, 200}) {
      const auto model = LueModel::make(n, alpha);
      const double c = 4.0 * n;
      double sup = 0.0;
      for (auto [x, y] : grid) sup = std::max(sup, std::fabs(lue_kernel(model, x / c, y / c) / c - bessel_kernel(spec, x, y)));
      CAPTURE(n);
      CHECK(sup < prev);
      prev = sup;
    }
    const auto m100 = LueModel::make(100, alpha);
    CHECK(std::fabs(lue_kernel(m100, 1.0 / 400.0, 2.0 / 400.0) / 400.0 - bessel_kernel(spec, 1.0, 2.0)) <= 2e-2);
  }
}

#include <doctest.h>

#include <cmath>

#include "besselgap/error.hpp"
#include "besselgap/fredholm.hpp"
#include "oracles.hpp"

using namespace besselgap;

TEST_SUITE("fredholm") {
  TEST_CASE("gap of (0, x) for integer alpha") {
    for (int alpha : {0, 1, 2, 3})
      for (double x : {0.5, 2.0, 8.0, 20.0}) {
        const auto F = generating_fn(ParameterSet{double(alpha), {x}, {0.0}, 1.0});
        CAPTURE(alpha);
        CAPTURE(x);
        CHECK(F.value() == doctest::Approx(oracle::hard_edge_gap(alpha, x)).epsilon(1e-12).scale(1e-3));
      }
    // frozen from hard_edge_gap(1, 2)
    CHECK(generating_fn(ParameterSet{1.0, {2.0}, {0.0}, 1.0}).value() ==
          doctest::Approx(0.949877312549813).epsilon(1e-13));
  }

  TEST_CASE("alpha = -1/2 against the even sine kernel") {
    for (double x : {0.5, 3.0, 10.0}) {
      const auto F = generating_fn(ParameterSet{-0.5, {x}, {0.0}, 1.0});
      CHECK(F.value() == doctest::Approx(oracle::even_sine_gap(x)).epsilon(1e-12).scale(1e-3));
    }
  }

  TEST_CASE("interval away from the origin against an independent Nystrom rule") {
    // multiplier 1 - s vanishes on (0, 1), so only (1, 3) with weight 0.6 remains
    const auto F = generating_fn(ParameterSet{0.5, {1.0, 3.0}, {1.0, 0.4}, 1.0});
    CHECK(F.value() == doctest::Approx(oracle::interval_det(0.5, 1.0, 3.0, 0.6)).epsilon(1e-12));
  }

  TEST_CASE("scaling by x is the same as scaling r") {
    const auto a = generating_fn(ParameterSet{0.5, {1.0, 2.0}, {0.3, 0.8}, 2.0});
    const auto b = generating_fn(ParameterSet{0.5, {2.0, 4.0}, {0.3, 0.8}, 1.0});
    CHECK(a.value() == doctest::Approx(b.value()).epsilon(1e-13));
  }

  TEST_CASE("continuity as two multipliers merge") {
    const double merged = generating_fn(ParameterSet{0.0, {3.0}, {0.4}, 1.0}).value();
    const double near = generating_fn(ParameterSet{0.0, {1.0, 3.0}, {0.4 + 1e-9, 0.4}, 1.0}).value();
    CHECK(std::fabs(near - merged) < 1e-8);
  }

  TEST_CASE("complex multipliers: conjugate symmetry and s = 1") {
    BesselKernel K(BesselKernelSpec{0.0});
    const auto op = discretize(std::vector<double>{1.0, 2.5}, K, 32);
    const auto a = fredholm_det(op, {cplx(0.3, 0.4), cplx(-0.5, 0.2)});
    const auto b = fredholm_det(op, {cplx(0.3, -0.4), cplx(-0.5, -0.2)});
    CHECK(a.value.real() == doctest::Approx(b.value.real()).epsilon(1e-14));
    CHECK(a.value.imag() == doctest::Approx(-b.value.imag()).epsilon(1e-14));
    CHECK(std::abs(fredholm_det(op, {cplx(1.0), cplx(1.0)}).value - cplx(1.0)) < 1e-15);
    CHECK(a.log_abs == doctest::Approx(std::log(std::abs(a.value))).epsilon(1e-14));
  }

  TEST_CASE("convergence report") {
    const auto F = generating_fn(ParameterSet{2.0, {1.0, 5.0, 9.0}, {0.2, 0.9, 0.0}, 1.0});
    CHECK(F.m_final >= 24);
    CHECK(F.last_change <= 1e-12);
    CHECK_THROWS_AS(generating_fn(ParameterSet{0.0, {50.0}, {0.0}, 1.0}, GenFnOptions{4, 1e-15, 1}), NumericalFailure);
    CHECK_THROWS_AS(generating_fn(ParameterSet{0.0, {1.0}, {0.0}, 1.0}, GenFnOptions{8, 1e-12, 0}), ValidationError);
  }

  TEST_CASE("validation") {
    CHECK_THROWS_AS((ParameterSet{0.0, {1.0, 2.0}, {1.0, 1.0}, 1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((ParameterSet{0.0, {1.0}, {1.0}, 1.0}.validate()), ValidationError);  // s_1 = s_2 = 1
    CHECK_THROWS_AS((ParameterSet{0.0, {2.0, 1.0}, {0.0, 0.5}, 1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((ParameterSet{-1.0, {1.0}, {0.0}, 1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((ParameterSet{0.0, {1.0}, {0.0, 0.5}, 1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((ParameterSet{0.0, {1.0}, {0.0}, 0.0}.validate()), ValidationError);
    CHECK_NOTHROW((ParameterSet{0.0, {1.0, 2.0}, {0.5, 2.0}, 1.0}.validate()));  // s outside [0, 1] is allowed
  }
}

#include "besselgap/specfun.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "besselgap/error.hpp"

namespace besselgap {

namespace {

void check_bessel_args(double alpha, double x) {
  if (!(alpha > -1.0) || !std::isfinite(alpha))
    throw DomainError("bessel_j: order must satisfy alpha > -1, got " + std::to_string(alpha));
  if (!(x >= 0.0) || !std::isfinite(x))
    throw DomainError("bessel_j: argument must be finite and >= 0, got " + std::to_string(x));
}

// Ascending series sum_m (-1)^m (x/2)^{2m+alpha} / (m! Gamma(m+alpha+1)),
// optionally differentiated termwise.  Only used where x is small enough that
// the terms decrease from the start, so there is no cancellation to speak of.
long double ascending(double alpha, double x, bool derivative, const SpecFunConfig& cfg) {
  using ld = long double;
  const ld a = alpha;
  const ld h = ld(x) / 2;
  const ld h2 = h * h;
  // leading term (x/2)^alpha / Gamma(alpha+1)
  ld t = std::exp(a * std::log(h) - std::lgamma(a + 1));
  ld sum = 0;
  for (int m = 0; m < cfg.max_terms; ++m) {
    const ld p = 2 * m + a;  // power of x in this term
    const ld term = derivative ? t * p / ld(x) : t;
    sum += term;
    if (std::fabs(term) <= cfg.series_tol * std::fabs(sum) && m > 0) break;
    t *= -h2 / ((m + 1) * (m + 1 + a));
  }
  return sum;
}

constexpr double kSeriesOnly = 2.0;

}  // namespace

void SpecFunConfig::validate() const {
  if (!(series_tol > 0.0)) throw ValidationError("SpecFunConfig: series_tol must be > 0");
  if (max_terms < 1) throw ValidationError("SpecFunConfig: max_terms must be >= 1");
}

double bessel_j(double alpha, double x, const SpecFunConfig& cfg) {
  check_bessel_args(alpha, x);
  if (x == 0.0) {
    if (alpha == 0.0) return 1.0;
    return alpha > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  if (x <= kSeriesOnly) return static_cast<double>(ascending(alpha, x, false, cfg));
  return boost::math::cyl_bessel_j(alpha, x);
}

double bessel_j_prime(double alpha, double x, const SpecFunConfig& cfg) {
  check_bessel_args(alpha, x);
  if (x == 0.0) {
    if (alpha == 0.0 || alpha > 1.0) return 0.0;
    if (alpha == 1.0) return 0.5;
    return alpha > 0.0 && alpha < 1.0 ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
  }
  if (x <= kSeriesOnly) return static_cast<double>(ascending(alpha, x, true, cfg));
  return boost::math::cyl_bessel_j_prime(alpha, x);
}

double ln_gamma(double z) {
  if (!(z > 0.0)) throw DomainError("ln_gamma: z must be > 0");
  return std::lgamma(z);
}

double gamma_fn(double z) {
  if (!(z > 0.0)) throw DomainError("gamma_fn: z must be > 0");
  return std::tgamma(z);
}

double reg_lower_gamma(double a, double x) {
  if (!(a > 0.0)) throw DomainError("reg_lower_gamma: a must be > 0");
  if (!(x >= 0.0)) throw DomainError("reg_lower_gamma: x must be >= 0");
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(a, x);
}

long double reg_lower_gamma_ld(long double a, long double x) {
  if (!(a > 0.0L)) throw DomainError("reg_lower_gamma: a must be > 0");
  if (!(x >= 0.0L)) throw DomainError("reg_lower_gamma: x must be >= 0");
  if (std::isinf(x)) return 1.0L;
  return boost::math::gamma_p(a, x);
}

LaguerreRecurrence laguerre_recurrence(int n, double alpha) {
  if (n < 1) throw DomainError("laguerre_recurrence: n must be >= 1");
  if (!(alpha > -1.0)) throw DomainError("laguerre_recurrence: alpha must be > -1");
  LaguerreRecurrence rec;
  rec.alpha = alpha;
  rec.a.resize(n + 1);
  rec.b.resize(n);
  for (int j = 0; j <= n; ++j) rec.a[j] = std::sqrt(j * (j + alpha));
  for (int j = 0; j < n; ++j) rec.b[j] = 2.0 * j + alpha + 1.0;
  return rec;
}

std::vector<double> laguerre_orthonormal(int n, double alpha, double x) {
  if (!(x >= 0.0)) throw DomainError("laguerre_orthonormal: x must be >= 0");
  const auto rec = laguerre_recurrence(n, alpha);
  std::vector<double> p(n);
  p[0] = std::exp(-0.5 * std::lgamma(alpha + 1.0));
  if (n > 1) p[1] = (x - rec.b[0]) * p[0] / rec.a[1];
  for (int j = 1; j + 1 < n; ++j) p[j + 1] = ((x - rec.b[j]) * p[j] - rec.a[j] * p[j - 1]) / rec.a[j + 1];
  return p;
}

}  // namespace besselgap

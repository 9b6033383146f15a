#pragma once

#include <vector>

namespace besselgap {

/// Truncation controls of the ascending series.
struct SpecFunConfig {
  double series_tol = 1e-17;
  int max_terms = 600;

  void validate() const;
};

/// Bessel function of the first kind J_alpha(x) for real alpha > -1, x >= 0.
///
/// Small arguments (x <= 2) use the ascending series in extended precision,
/// which keeps full relative accuracy as x -> 0 for every alpha > -1; larger
/// arguments go to Boost.Math. J_alpha(0) is +inf for alpha < 0.
double bessel_j(double alpha, double x, const SpecFunConfig& cfg = {});

/// d/dx J_alpha(x), equal to (J_{alpha-1} - J_{alpha+1}) / 2.
double bessel_j_prime(double alpha, double x, const SpecFunConfig& cfg = {});

double ln_gamma(double z);
double gamma_fn(double z);

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double reg_lower_gamma(double a, double x);
long double reg_lower_gamma_ld(long double a, long double x);

/// Three-term recurrence of the orthonormal Laguerre family for the weight
/// x^alpha e^{-x}:  x p_j = a_{j+1} p_{j+1} + b_j p_j + a_j p_{j-1}.
struct LaguerreRecurrence {
  double alpha = 0.0;
  std::vector<double> a;  // a[j] = sqrt(j (j + alpha)), j = 0..n
  std::vector<double> b;  // b[j] = 2j + alpha + 1, j = 0..n-1
};

LaguerreRecurrence laguerre_recurrence(int n, double alpha);

/// p_0(x), ..., p_{n-1}(x) by forward recurrence (positive leading coefficient).
std::vector<double> laguerre_orthonormal(int n, double alpha, double x);

}  // namespace besselgap

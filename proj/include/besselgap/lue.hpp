#pragma once

#include <cstdint>
#include <vector>

#include "besselgap/fredholm.hpp"
#include "besselgap/kernels.hpp"

namespace besselgap {

/// F_n(lambda, s) = det(1 - sum_j (1 - s_j) K_n chi_(lambda_{j-1}, lambda_j))
/// by the Nystrom machinery with the finite-n kernel.
GenFnResult lue_genfn(const LueModel& model, const std::vector<double>& lambdas, const std::vector<double>& s,
                      const GenFnOptions& opt = {24, 1e-10, 4});

/// Moments mu_m = int w(x) (1 - sum_j (1 - s_j) chi_j(x)) x^m dx, m = 0..2n-2,
/// stored as log|mu_m| and sign.
struct JumpWeightMoments {
  int n = 0;
  double alpha = 0.0;
  std::vector<long double> log_abs;
  std::vector<int> sign;

  static JumpWeightMoments make(int n, double alpha, const std::vector<double>& lambdas, const std::vector<double>& s);
  long double mu(int m) const;
};

inline constexpr int kHankelMaxN = 12;

struct HankelResult {
  double value = 0.0;
  double log_abs = 0.0;
  double condition = 0.0;  // 1-norm condition estimate of the equilibrated matrix
};

/// det(mu_{i+j})_{i,j<n} / exp(log_partition), with the moment matrix
/// equilibrated by D_i = sqrt(Gamma(alpha + 2i + 1)) and factored in long
/// double.  Refuses n > 12.
HankelResult hankel_ratio(int n, double alpha, const std::vector<double>& lambdas, const std::vector<double>& s);

/// One draw of the LUE(n, alpha) spectrum (beta = 2), increasing.
std::vector<double> sample_spectrum(int n, double alpha, std::uint64_t seed);

}  // namespace besselgap

#include "besselgap/lue.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "besselgap/error.hpp"

namespace besselgap {

GenFnResult lue_genfn(const LueModel& model, const std::vector<double>& lambdas, const std::vector<double>& s,
                      const GenFnOptions& opt) {
  if (lambdas.size() != s.size() || lambdas.empty())
    throw ValidationError("lue_genfn: need one multiplier per endpoint");
  LueKernel kernel(model);
  return generating_fn(kernel, lambdas, std::vector<cplx>(s.begin(), s.end()), opt);
}

namespace {

using ld = long double;

// Normalized mass of Gamma(a) on (lo, hi), without cancellation in the tails.
ld gamma_mass(ld a, ld lo, ld hi) {
  if (hi <= lo) return 0.0L;
  if (lo > a) return boost::math::gamma_q(a, lo) - (std::isinf(hi) ? 0.0L : boost::math::gamma_q(a, hi));
  const ld phi = std::isinf(hi) ? 1.0L : boost::math::gamma_p(a, hi);
  return phi - (lo > 0.0L ? boost::math::gamma_p(a, lo) : 0.0L);
}

}  // namespace

JumpWeightMoments JumpWeightMoments::make(int n, double alpha, const std::vector<double>& lambdas,
                                          const std::vector<double>& s) {
  if (n < 1) throw ValidationError("JumpWeightMoments: n must be >= 1");
  if (!(alpha > -1.0)) throw ValidationError("JumpWeightMoments: alpha must be > -1");
  if (lambdas.size() != s.size()) throw ValidationError("JumpWeightMoments: size mismatch");
  for (std::size_t j = 0; j < lambdas.size(); ++j)
    if (!(lambdas[j] > (j ? lambdas[j - 1] : 0.0))) throw ValidationError("JumpWeightMoments: lambdas must increase");
  JumpWeightMoments mom;
  mom.n = n;
  mom.alpha = alpha;
  for (int m = 0; m <= 2 * n - 2; ++m) {
    const ld a = static_cast<ld>(alpha) + m + 1;
    // 1 - sum (1 - s_j) P_j  ==  sum s_j P_j + (tail beyond lambda_k)
    ld bracket = 0.0L, lo = 0.0L;
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
      bracket += static_cast<ld>(s[j]) * gamma_mass(a, lo, lambdas[j]);
      lo = lambdas[j];
    }
    bracket += gamma_mass(a, lo, INFINITY);
    mom.sign.push_back(bracket > 0 ? 1 : (bracket < 0 ? -1 : 0));
    mom.log_abs.push_back(std::lgamma(a) + (bracket != 0 ? std::log(std::fabs(bracket)) : -INFINITY));
  }
  return mom;
}

long double JumpWeightMoments::mu(int m) const { return sign[m] * std::exp(log_abs[m]); }

HankelResult hankel_ratio(int n, double alpha, const std::vector<double>& lambdas, const std::vector<double>& s) {
  if (n > kHankelMaxN)
    throw ValidationError("hankel_ratio: n = " + std::to_string(n) + " exceeds the conditioning guard n <= " +
                          std::to_string(kHankelMaxN) + "; use lue_genfn instead");
  const auto mom = JumpWeightMoments::make(n, alpha, lambdas, s);
  std::vector<ld> logD(n);
  for (int i = 0; i < n; ++i) logD[i] = 0.5L * std::lgamma(static_cast<ld>(alpha) + 2 * i + 1);
  using Mat = Eigen::Matrix<ld, Eigen::Dynamic, Eigen::Dynamic>;
  Mat H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = mom.sign[i + j] * std::exp(mom.log_abs[i + j] - logD[i] - logD[j]);
  Eigen::PartialPivLU<Mat> lu(H);
  ld log_det = 0.0L;
  int sgn = lu.permutationP().determinant() < 0 ? -1 : 1;
  for (int i = 0; i < n; ++i) {
    const ld d = lu.matrixLU()(i, i);
    if (d == 0.0L) throw NumericalFailure("hankel_ratio: singular moment matrix");
    if (d < 0) sgn = -sgn;
    log_det += std::log(std::fabs(d));
  }
  for (int i = 0; i < n; ++i) log_det += 2.0L * logD[i];
  ld log_partition = 0.0L;
  for (int j = 0; j < n; ++j) log_partition += std::lgamma(j + 1.0L) + std::lgamma(static_cast<ld>(alpha) + j + 1);
  HankelResult res;
  res.log_abs = static_cast<double>(log_det - log_partition);
  res.value = sgn * std::exp(res.log_abs);
  const Mat inv = lu.inverse();
  res.condition = static_cast<double>(H.cwiseAbs().colwise().sum().maxCoeff() *
                                      inv.cwiseAbs().colwise().sum().maxCoeff());
  return res;
}

std::vector<double> sample_spectrum(int n, double alpha, std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample_spectrum: n must be >= 1");
  if (!(alpha > -1.0)) throw ValidationError("sample_spectrum: alpha must be > -1");
  std::mt19937_64 rng(seed);
  // Bidiagonal model: B = bidiag(d, e), d_i^2 ~ Gamma(n + alpha - i), e_i^2 ~ Gamma(n - 1 - i);
  // the eigenvalues of B B^T have density prop. to prod |l_i - l_j|^2 prod l_i^alpha e^{-l_i}.
  Eigen::VectorXd d(n), e(n > 1 ? n - 1 : 0);
  for (int i = 0; i < n; ++i) {
    std::gamma_distribution<double> g(n + alpha - i, 1.0);
    d[i] = std::sqrt(g(rng));
  }
  for (int i = 0; i + 1 < n; ++i) {
    std::gamma_distribution<double> g(n - 1.0 - i, 1.0);
    e[i] = std::sqrt(g(rng));
  }
  // upper bidiagonal B: (B B^T)_{ii} = d_i^2 + e_i^2, (B B^T)_{i,i+1} = e_i d_{i+1}
  Eigen::VectorXd diag(n), off(n > 1 ? n - 1 : 0);
  for (int i = 0; i < n; ++i) diag[i] = d[i] * d[i] + (i + 1 < n ? e[i] * e[i] : 0.0);
  for (int i = 0; i + 1 < n; ++i) off[i] = e[i] * d[i + 1];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("sample_spectrum: eigensolver failed");
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace besselgap

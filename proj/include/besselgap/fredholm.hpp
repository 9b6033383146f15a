#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "besselgap/kernels.hpp"

namespace besselgap {

using cplx = std::complex<double>;

/// (alpha, r, s, x): intervals (x_{j-1}, x_j) with x_j = r_j x, x_0 = 0, and
/// multipliers s_j on them; s_{k+1} = 1 by convention.
struct ParameterSet {
  double alpha = 0.0;
  std::vector<double> r;
  std::vector<double> s;
  double x = 1.0;

  int k() const { return static_cast<int>(r.size()); }
  /// s_{j+1} - s_j for j = 0..k-1 (zero-based), with s_{k+1} = 1.
  double ds(int j) const { return (j + 1 < k() ? s[j + 1] : 1.0) - s[j]; }
  std::vector<double> endpoints() const;
  ParameterSet at(double new_x) const;

  /// Throws ValidationError on r not positive and strictly increasing,
  /// s_j == s_{j+1}, size mismatch, alpha <= -1, or x <= 0.
  void validate() const;
};

/// Nystrom discretization of  sum_j (1 - s_j) K chi_(x_{j-1}, x_j)  on (0, x_k).
struct DiscretizedOperator {
  int m = 0;
  std::vector<double> endpoints;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<int> interval;             // subinterval index of each node
  std::vector<cplx> multipliers;         // 1 - s_{interval(a)}
  Eigen::MatrixXd kernel_matrix;         // sqrt(w_a) K(u_a, u_b) sqrt(w_b)

  Eigen::Index size() const { return static_cast<Eigen::Index>(nodes.size()); }
  /// M_ab = kernel_matrix_ab * multipliers_b.
  Eigen::MatrixXcd matrix() const;
};

/// Builds nodes and the weighted kernel matrix; multipliers are zero until
/// assigned.  Gauss-Legendre on every subinterval except the first, where the
/// rule carries the weight u^a of the kernel's origin exponent a (exact for the
/// (xy)^{a/2} factor, so convergence stays spectral for non-integer alpha).
DiscretizedOperator discretize(const std::vector<double>& endpoints, const Kernel& kernel, int m);
DiscretizedOperator discretize(const ParameterSet& params, const Kernel& kernel, int m);

struct DetResult {
  cplx value;
  double log_abs = 0.0;  // log |det|
  double phase = 0.0;    // arg det
};

/// det(I - M) by partial-pivot LU, in real arithmetic when every multiplier is
/// real.  Columns with zero multiplier are dropped (the matrix is block
/// triangular there).
DetResult fredholm_det(const DiscretizedOperator& op);
/// Same operator with the per-interval multipliers replaced by s (size k).
DetResult fredholm_det(const DiscretizedOperator& op, const std::vector<cplx>& s);

struct GenFnResult {
  DetResult det;
  int m_final = 0;
  double last_change = 0.0;
  double value() const { return det.value.real(); }
};

struct GenFnOptions {
  int m0 = 24;
  double tol = 1e-12;
  int max_doublings = 4;
};

/// F at possibly complex multipliers, doubling m until successive values agree
/// to tol.  Throws NumericalFailure with the last two values otherwise.
GenFnResult generating_fn(const Kernel& kernel, const std::vector<double>& endpoints,
                          const std::vector<cplx>& s, const GenFnOptions& opt = {});
GenFnResult generating_fn(const ParameterSet& params, const GenFnOptions& opt = {});

}  // namespace besselgap

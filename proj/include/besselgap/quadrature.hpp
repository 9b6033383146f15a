#pragma once

#include <vector>

namespace besselgap {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// m-point Gauss-Legendre rule on [-1, 1] (Newton on P_m from Chebyshev
/// initial guesses).  Results are memoized per m.
const QuadratureRule& gauss_legendre(int m);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int m, double a, double b);

/// m-point generalized Gauss-Laguerre rule for the weight x^alpha e^{-x} on
/// (0, inf), by Golub-Welsch on the orthonormal Laguerre Jacobi matrix.
QuadratureRule gauss_laguerre(int m, double alpha);

/// m-point Gauss-Jacobi rule for the weight u^beta on (0, L), beta > -1,
/// by Golub-Welsch.  Weights include the factor u^beta.
QuadratureRule gauss_jacobi_origin(int m, double beta, double L);

}  // namespace besselgap

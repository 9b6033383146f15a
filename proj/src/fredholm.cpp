#include "besselgap/fredholm.hpp"

#include <cmath>
#include <sstream>
#include <type_traits>

#include "besselgap/error.hpp"
#include "besselgap/quadrature.hpp"

namespace besselgap {

std::vector<double> ParameterSet::endpoints() const {
  std::vector<double> e(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) e[j] = r[j] * x;
  return e;
}

ParameterSet ParameterSet::at(double new_x) const {
  ParameterSet p = *this;
  p.x = new_x;
  return p;
}

void ParameterSet::validate() const {
  if (!(alpha > -1.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be finite and > -1");
  if (r.empty()) throw ValidationError("at least one interval endpoint r is required");
  if (r.size() != s.size())
    throw ValidationError("r and s must have equal length (got " + std::to_string(r.size()) + " and " +
                          std::to_string(s.size()) + ")");
  if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("x must be finite and > 0");
  for (int j = 0; j < k(); ++j) {
    if (!std::isfinite(r[j]) || !std::isfinite(s[j])) throw ValidationError("r and s must be finite");
    const double prev = j == 0 ? 0.0 : r[j - 1];
    if (!(r[j] > prev)) throw ValidationError("r must be positive and strictly increasing");
  }
  for (int j = 0; j < k(); ++j) {
    if (ds(j) == 0.0) {
      std::ostringstream os;
      os << "s_" << j + 1 << " == s_" << j + 2 << " (with s_" << k() + 1
         << " = 1): adjacent intervals with equal multipliers must be merged first; "
            "F is unchanged when endpoint r_" << j + 1 << " is removed together with s_" << j + 1;
      throw ValidationError(os.str());
    }
  }
}

Eigen::MatrixXcd DiscretizedOperator::matrix() const {
  Eigen::MatrixXcd M = kernel_matrix.cast<cplx>();
  for (Eigen::Index b = 0; b < size(); ++b) M.col(b) *= multipliers[b];
  return M;
}

DiscretizedOperator discretize(const std::vector<double>& endpoints, const Kernel& kernel, int m) {
  if (m < 2) throw ValidationError("discretize: m must be >= 2");
  if (endpoints.empty()) throw ValidationError("discretize: no intervals");
  DiscretizedOperator op;
  op.m = m;
  op.endpoints = endpoints;
  const double a0 = kernel.origin_exponent();
  double prev = 0.0;
  for (std::size_t j = 0; j < endpoints.size(); ++j) {
    if (!(endpoints[j] > prev)) throw ValidationError("discretize: endpoints must be positive and increasing");
    QuadratureRule q;
    if (j == 0 && a0 != 0.0) {
      // Rule for u^a0 f(u); dividing the weights by u^a0 turns it back into a
      // rule for f, exact whenever f = u^a0 * polynomial.
      q = gauss_jacobi_origin(m, a0, endpoints[0]);
      for (int i = 0; i < m; ++i) q.weights[i] /= std::pow(q.nodes[i], a0);
    } else {
      q = gauss_legendre(m, prev, endpoints[j]);
    }
    for (int i = 0; i < m; ++i) {
      op.nodes.push_back(q.nodes[i]);
      op.weights.push_back(q.weights[i]);
      op.interval.push_back(static_cast<int>(j));
    }
    prev = endpoints[j];
  }
  op.multipliers.assign(op.nodes.size(), cplx(0.0));
  op.kernel_matrix = kernel.gram(op.nodes);
  const Eigen::Map<const Eigen::VectorXd> w(op.weights.data(), op.size());
  const Eigen::VectorXd sw = w.cwiseSqrt();
  op.kernel_matrix = sw.asDiagonal() * op.kernel_matrix * sw.asDiagonal();
  return op;
}

DiscretizedOperator discretize(const ParameterSet& params, const Kernel& kernel, int m) {
  params.validate();
  auto op = discretize(params.endpoints(), kernel, m);
  for (Eigen::Index a = 0; a < op.size(); ++a) op.multipliers[a] = 1.0 - params.s[op.interval[a]];
  return op;
}

namespace {

template <class Matrix>
DetResult lu_det(const Matrix& A) {
  Eigen::PartialPivLU<Matrix> lu(A);
  const auto& LU = lu.matrixLU();
  double log_abs = 0.0;
  double phase = lu.permutationP().determinant() < 0 ? M_PI : 0.0;
  for (Eigen::Index i = 0; i < LU.rows(); ++i) {
    const cplx d = LU(i, i);
    if (d == 0.0) throw NumericalFailure("fredholm_det: exact singularity in LU (F = 0 to machine precision)");
    log_abs += std::log(std::abs(d));
    phase += std::arg(d);
  }
  phase = std::remainder(phase, 2.0 * M_PI);
  DetResult r{std::polar(std::exp(log_abs), phase), log_abs, phase};
  // real determinants: phase is 0 or pi, keep the value exactly real
  if constexpr (std::is_same_v<typename Matrix::Scalar, double>)
    r.value = cplx(std::cos(phase) > 0 ? std::exp(log_abs) : -std::exp(log_abs), 0.0);
  return r;
}

// I - K diag(mult), restricted to the columns (and rows) with nonzero multiplier.
template <class Scalar>
DetResult det_restricted(const Eigen::MatrixXd& K, const std::vector<cplx>& mult,
                         const std::vector<Eigen::Index>& active) {
  const auto n = static_cast<Eigen::Index>(active.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar c;
    if constexpr (std::is_same_v<Scalar, double>) c = mult[active[j]].real();
    else c = mult[active[j]];
    for (Eigen::Index i = 0; i < n; ++i) A(i, j) = -K(active[i], active[j]) * c;
    A(j, j) += 1.0;
  }
  return lu_det(A);
}

DetResult det_with_multipliers(const Eigen::MatrixXd& K, const std::vector<cplx>& mult) {
  std::vector<Eigen::Index> active;
  bool real = true;
  for (std::size_t a = 0; a < mult.size(); ++a) {
    if (mult[a] != 0.0) active.push_back(static_cast<Eigen::Index>(a));
    if (mult[a].imag() != 0.0) real = false;
  }
  if (active.empty()) return DetResult{cplx(1.0), 0.0, 0.0};
  return real ? det_restricted<double>(K, mult, active) : det_restricted<cplx>(K, mult, active);
}

}  // namespace

DetResult fredholm_det(const DiscretizedOperator& op) {
  return det_with_multipliers(op.kernel_matrix, op.multipliers);
}

DetResult fredholm_det(const DiscretizedOperator& op, const std::vector<cplx>& s) {
  if (s.size() != op.endpoints.size()) throw ValidationError("fredholm_det: one multiplier per interval expected");
  std::vector<cplx> mult(op.nodes.size());
  for (Eigen::Index a = 0; a < op.size(); ++a) mult[a] = 1.0 - s[op.interval[a]];
  return det_with_multipliers(op.kernel_matrix, mult);
}

GenFnResult generating_fn(const Kernel& kernel, const std::vector<double>& endpoints,
                          const std::vector<cplx>& s, const GenFnOptions& opt) {
  if (opt.m0 < 2) throw ValidationError("generating_fn: m0 must be >= 2");
  if (opt.max_doublings < 1) throw ValidationError("generating_fn: max_doublings must be >= 1");
  int m = opt.m0;
  DetResult prev = fredholm_det(discretize(endpoints, kernel, m), s);
  for (int d = 0; d < opt.max_doublings; ++d) {
    m *= 2;
    const DetResult cur = fredholm_det(discretize(endpoints, kernel, m), s);
    const double change = std::abs(cur.value - prev.value);
    if (change < opt.tol) return GenFnResult{cur, m, change};
    if (d + 1 == opt.max_doublings) {
      std::ostringstream os;
      os.precision(17);
      os << "generating_fn: no convergence to " << opt.tol << " by m = " << m << "; last values "
         << prev.value << " and " << cur.value;
      throw NumericalFailure(os.str());
    }
    prev = cur;
  }
  throw NumericalFailure("generating_fn: unreachable");
}

GenFnResult generating_fn(const ParameterSet& params, const GenFnOptions& opt) {
  params.validate();
  BesselKernel kernel(BesselKernelSpec{params.alpha});
  std::vector<cplx> s(params.s.begin(), params.s.end());
  return generating_fn(kernel, params.endpoints(), s, opt);
}

}  // namespace besselgap

#include "besselgap/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

#include "besselgap/error.hpp"

namespace besselgap {

namespace {

// P_m(x) and P_m'(x) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int m, double x) {
  double p0 = 1.0, p1 = x;
  for (int j = 2; j <= m; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  return {p1, m * (x * p1 - p0) / (x * x - 1.0)};
}

QuadratureRule compute_legendre(int m) {
  QuadratureRule q;
  q.nodes.resize(m);
  q.weights.resize(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre_with_derivative(m, x);
      const double dx = p / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    const double dp = legendre_with_derivative(m, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = -x;
    q.nodes[m - 1 - i] = x;
    q.weights[i] = w;
    q.weights[m - 1 - i] = w;
  }
  return q;
}

}  // namespace

const QuadratureRule& gauss_legendre(int m) {
  if (m < 1) throw DomainError("gauss_legendre: m must be >= 1");
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, compute_legendre(m)).first;
  return it->second;
}

QuadratureRule gauss_legendre(int m, double a, double b) {
  const auto& ref = gauss_legendre(m);
  QuadratureRule q = ref;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < m; ++i) {
    q.nodes[i] = mid + half * ref.nodes[i];
    q.weights[i] = half * ref.weights[i];
  }
  return q;
}

QuadratureRule gauss_laguerre(int m, double alpha) {
  if (m < 1) throw DomainError("gauss_laguerre: m must be >= 1");
  if (!(alpha > -1.0)) throw DomainError("gauss_laguerre: alpha must be > -1");
  Eigen::VectorXd diag(m), off(m > 1 ? m - 1 : 0);
  for (int j = 0; j < m; ++j) diag(j) = 2.0 * j + alpha + 1.0;
  for (int j = 1; j < m; ++j) off(j - 1) = std::sqrt(j * (j + alpha));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalFailure("gauss_laguerre: eigensolver failed");
  QuadratureRule q;
  q.nodes.resize(m);
  q.weights.resize(m);
  const double mu0 = std::tgamma(alpha + 1.0);
  for (int i = 0; i < m; ++i) {
    q.nodes[i] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    q.weights[i] = mu0 * v * v;
  }
  return q;
}

QuadratureRule gauss_jacobi_origin(int m, double beta, double L) {
  if (m < 1) throw DomainError("gauss_jacobi_origin: m must be >= 1");
  if (!(beta > -1.0)) throw DomainError("gauss_jacobi_origin: beta must be > -1");
  if (beta == 0.0) return gauss_legendre(m, 0.0, L);
  // Jacobi weight (1-t)^0 (1+t)^beta on [-1, 1], then v = (1+t)/2, u = L v.
  const double a = 0.0, b = beta, ab = a + b;
  Eigen::VectorXd diag(m), off(m > 1 ? m - 1 : 0);
  for (int j = 0; j < m; ++j) {
    const double t = 2.0 * j + ab;
    diag(j) = (b * b - a * a) / (t * (t + 2.0));
  }
  for (int j = 1; j < m; ++j) {
    const double t = 2.0 * j + ab;
    off(j - 1) = 2.0 / t * std::sqrt(j * (j + a) * (j + b) * (j + ab) / (t * t - 1.0));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalFailure("gauss_jacobi_origin: eigensolver failed");
  // total mass of the weight u^beta on (0, L)
  const double mass = std::pow(L, beta + 1.0) / (beta + 1.0);
  QuadratureRule q;
  q.nodes.resize(m);
  q.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    q.nodes[i] = 0.5 * L * (1.0 + es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    q.weights[i] = mass * v * v;
  }
  return q;
}

}  // namespace besselgap

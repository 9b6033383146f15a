#include "besselgap/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "besselgap/error.hpp"

namespace besselgap {

Eigen::MatrixXd Kernel::gram(const std::vector<double>& u) const {
  const auto n = static_cast<Eigen::Index>(u.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b) g(a, b) = g(b, a) = (*this)(u[a], u[b]);
  return g;
}

void BesselKernelSpec::validate() const {
  if (!(alpha > -1.0)) throw ValidationError("BesselKernelSpec: alpha must be > -1");
  if (!(diag_threshold > 0.0)) throw ValidationError("BesselKernelSpec: diag_threshold must be > 0");
}

namespace {

struct BesselNode {
  double t;    // sqrt(x)
  double j0;   // J_alpha(t)
  double j1;   // J_{alpha+1}(t)
};

BesselNode bessel_node(double alpha, double x) {
  const double t = std::sqrt(x);
  return {t, bessel_j(alpha, t), bessel_j(alpha + 1.0, t)};
}

// K(x,x) = (J'^2 + (1 - a^2/x) J^2) / 4, rewritten through J' = (a/t) J - J_{a+1}.
double bessel_diag(double alpha, const BesselNode& n) {
  return 0.25 * (n.j0 * n.j0 - 2.0 * alpha * n.j0 * n.j1 / n.t + n.j1 * n.j1);
}

double bessel_offdiag(double x, double y, const BesselNode& p, const BesselNode& q) {
  return (p.t * p.j1 * q.j0 - q.t * p.j0 * q.j1) / (2.0 * (x - y));
}

bool in_band(double x, double y, double thr) { return std::fabs(x - y) < thr * std::max(x, y); }

void check_positive(double x, double y, const char* who) {
  if (!(x > 0.0) || !(y > 0.0))
    throw DomainError(std::string(who) + ": arguments must be > 0");
}

}  // namespace

double bessel_kernel(const BesselKernelSpec& spec, double x, double y) {
  check_positive(x, y, "bessel_kernel");
  if (in_band(x, y, spec.diag_threshold)) return bessel_diag(spec.alpha, bessel_node(spec.alpha, 0.5 * (x + y)));
  return bessel_offdiag(x, y, bessel_node(spec.alpha, x), bessel_node(spec.alpha, y));
}

BesselKernel::BesselKernel(BesselKernelSpec spec) : spec_(spec) { spec_.validate(); }

Eigen::MatrixXd BesselKernel::gram(const std::vector<double>& u) const {
  const auto n = static_cast<Eigen::Index>(u.size());
  std::vector<BesselNode> nodes(u.size());
  for (Eigen::Index a = 0; a < n; ++a) {
    if (!(u[a] > 0.0)) throw DomainError("bessel_kernel: arguments must be > 0");
    nodes[a] = bessel_node(spec_.alpha, u[a]);
  }
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    g(a, a) = bessel_diag(spec_.alpha, nodes[a]);
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double v = in_band(u[a], u[b], spec_.diag_threshold)
                           ? bessel_kernel(spec_, u[a], u[b])
                           : bessel_offdiag(u[a], u[b], nodes[a], nodes[b]);
      g(a, b) = g(b, a) = v;
    }
  }
  return g;
}

LueModel LueModel::make(int n, double alpha) {
  if (n < 1) throw ValidationError("LueModel: n must be >= 1");
  if (!(alpha > -1.0)) throw ValidationError("LueModel: alpha must be > -1");
  LueModel m;
  m.n = n;
  m.alpha = alpha;
  m.rec = laguerre_recurrence(n, alpha);
  for (int j = 0; j < n; ++j) m.log_partition += std::lgamma(j + 1.0) + std::lgamma(j + alpha + 1.0);
  return m;
}

LueEdgeValues lue_edge_values(const LueModel& model, double lam) {
  if (!(lam > 0.0)) throw DomainError("lue_kernel: arguments must be > 0");
  const int n = model.n;
  const auto& a = model.rec.a;
  const auto& b = model.rec.b;
  // log of sqrt(w(lam)) p_0
  double log_scale = 0.5 * (model.alpha * std::log(lam) - lam - std::lgamma(model.alpha + 1.0));
  double pm2 = 0.0, pm1 = 0.0, p = 1.0;  // p_{j-2}, p_{j-1}, p_j, all times exp(-log_scale)
  for (int j = 0; j < n; ++j) {
    // advance p_j -> p_{j+1}
    const double next = ((lam - b[j]) * p - a[j] * pm1) / a[j + 1];
    pm2 = pm1;
    pm1 = p;
    p = next;
    const double mag = std::max({std::fabs(pm2), std::fabs(pm1), std::fabs(p)});
    if (mag > 1e150 || (mag < 1e-150 && mag > 0.0)) {
      pm2 /= mag;
      pm1 /= mag;
      p /= mag;
      log_scale += std::log(mag);
    }
  }
  const double s = std::exp(log_scale);
  return {pm2 * s, pm1 * s, p * s};
}

namespace {

// Diagonal from x p_n' = n p_n + a_n p_{n-1}:
// K(x,x) = (a_n / x) [phi_n phi_{n-1} + a_n phi_{n-1}^2 - a_{n-1} phi_{n-2} phi_n].
double lue_diag(const LueModel& m, double lam, const LueEdgeValues& e) {
  const double an = m.rec.a[m.n], anm1 = m.rec.a[m.n - 1];
  return an / lam * (e.phi_n * e.phi_nm1 + an * e.phi_nm1 * e.phi_nm1 - anm1 * e.phi_nm2 * e.phi_n);
}

double lue_offdiag(const LueModel& m, double x, double y, const LueEdgeValues& ex, const LueEdgeValues& ey) {
  return m.rec.a[m.n] * (ex.phi_n * ey.phi_nm1 - ex.phi_nm1 * ey.phi_n) / (x - y);
}

}  // namespace

double lue_kernel(const LueModel& model, double lam, double nu) {
  if (!(lam > 0.0) || !(nu > 0.0)) throw DomainError("lue_kernel: arguments must be > 0");
  if (in_band(lam, nu, model.diag_threshold)) {
    const double mid = 0.5 * (lam + nu);
    return lue_diag(model, mid, lue_edge_values(model, mid));
  }
  return lue_offdiag(model, lam, nu, lue_edge_values(model, lam), lue_edge_values(model, nu));
}

Eigen::MatrixXd LueKernel::gram(const std::vector<double>& u) const {
  const auto n = static_cast<Eigen::Index>(u.size());
  std::vector<LueEdgeValues> e(u.size());
  for (Eigen::Index a = 0; a < n; ++a) e[a] = lue_edge_values(model_, u[a]);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    g(a, a) = lue_diag(model_, u[a], e[a]);
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double v = in_band(u[a], u[b], model_.diag_threshold)
                           ? lue_kernel(model_, u[a], u[b])
                           : lue_offdiag(model_, u[a], u[b], e[a], e[b]);
      g(a, b) = g(b, a) = v;
    }
  }
  return g;
}

}  // namespace besselgap

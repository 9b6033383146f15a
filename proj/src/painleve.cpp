#include "besselgap/painleve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "besselgap/error.hpp"
#include "besselgap/specfun.hpp"

namespace besselgap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int sign_of(double v) { return v >= 0.0 ? 1 : -1; }

// Multiplier form shared by both systems.  With pi = xi rho' and t = ln xi:
//   d rho_i / dt = pi_i
//   d pi_i / dt  = (V - xi R_i / 4) rho_i - K_i / rho_i^3
//   V = [xi sum sigma R rho^2 / 4 + sum sigma K / rho^2 - sum sigma pi^2] / sum sigma rho^2
// V is the multiplier that keeps sum sigma rho^2 constant.
struct MultiplierForm {
  std::vector<int> sigma;
  std::vector<double> R;
  std::vector<double> K;

  int n() const { return static_cast<int>(sigma.size()); }

  void accel(double xi, const double* rho, const double* pi, double* dpi) const {
    double C = 0.0, num = 0.0;
    for (int i = 0; i < n(); ++i) {
      const double r2 = rho[i] * rho[i];
      C += sigma[i] * r2;
      num += sigma[i] * (xi * R[i] * r2 / 4.0 - pi[i] * pi[i]);
      if (K[i] != 0.0) {
        if (std::fabs(rho[i]) < 1e-7) throw StiffnessSignal("component with centrifugal term reached zero");
        num += sigma[i] * K[i] / r2;
      }
    }
    if (std::fabs(C) < 1e-8) throw StiffnessSignal("constraint sum collapsed");
    const double V = num / C;
    for (int i = 0; i < n(); ++i) {
      dpi[i] = (V - xi * R[i] / 4.0) * rho[i];
      if (K[i] != 0.0) dpi[i] -= K[i] / (rho[i] * rho[i] * rho[i]);
    }
  }
};

MultiplierForm main_form(const ParameterSet& p, int sigma0, const std::vector<int>& sigma) {
  MultiplierForm f;
  f.sigma.push_back(sigma0);
  f.R.push_back(0.0);
  f.K.push_back(p.alpha * p.alpha / 4.0);
  for (int j = 0; j < p.k(); ++j) {
    f.sigma.push_back(sigma[j]);
    f.R.push_back(p.r[j]);
    f.K.push_back(0.0);
  }
  return f;
}

// Rescale so that sum sigma rho^2 = 1 and remove the component of rho' that
// violates its derivative.
void normalize(PainleveState& st) {
  double C = st.sigma0 * st.rho0 * st.rho0;
  for (std::size_t j = 0; j < st.rho.size(); ++j) C += st.sigma[j] * st.rho[j] * st.rho[j];
  if (!(C > 0.0)) throw NumericalFailure("seed: constraint sum is not positive");
  const double f = 1.0 / std::sqrt(C);
  st.rho0 *= f;
  st.drho0 *= f;
  for (std::size_t j = 0; j < st.rho.size(); ++j) {
    st.rho[j] *= f;
    st.drho[j] *= f;
  }
  double P = st.sigma0 * st.rho0 * st.drho0;
  for (std::size_t j = 0; j < st.rho.size(); ++j) P += st.sigma[j] * st.rho[j] * st.drho[j];
  st.drho0 -= P * st.rho0;
  for (std::size_t j = 0; j < st.rho.size(); ++j) st.drho[j] -= P * st.rho[j];
}

// Coefficients c_p, powers p of the small-xi expansion of
// ds * J_alpha(sqrt(r xi))^2 * (1 + kappa xi^{1+alpha})^2, truncated.
struct PowerSeries {
  std::vector<double> coef;
  std::vector<double> power;

  double integral(double eps) const {  // int_0^eps
    double s = 0.0;
    for (std::size_t i = 0; i < coef.size(); ++i) s += coef[i] * std::pow(eps, power[i] + 1) / (power[i] + 1);
    return s;
  }
  double log_integral(double eps) const {  // int_0^eps log(eps/eta) (.)
    double s = 0.0;
    for (std::size_t i = 0; i < coef.size(); ++i)
      s += coef[i] * std::pow(eps, power[i] + 1) / ((power[i] + 1) * (power[i] + 1));
    return s;
  }
};

PowerSeries bessel_square_series(double alpha, double r, double ds, double kappa, int terms = 12) {
  std::vector<double> a(terms);
  const double h = r / 4.0;
  for (int m = 0; m < terms; ++m)
    a[m] = std::exp((m + alpha / 2.0) * std::log(h) - std::lgamma(m + 1.0) - std::lgamma(m + alpha + 1.0)) *
           (m % 2 ? -1.0 : 1.0);
  PowerSeries s;
  for (int nn = 0; nn < terms; ++nn) {
    double d = 0.0;
    for (int i = 0; i <= nn; ++i) d += a[i] * a[nn - i];
    s.coef.push_back(ds * d);
    s.power.push_back(alpha + nn);
    if (kappa != 0.0) {
      s.coef.push_back(ds * d * 2.0 * kappa);
      s.power.push_back(2.0 * alpha + 1.0 + nn);
      s.coef.push_back(ds * d * kappa * kappa);
      s.power.push_back(3.0 * alpha + 2.0 + nn);
    }
  }
  return s;
}

double seed_kappa(const ParameterSet& p) {
  const double a = p.alpha;
  double kappa = 0.0;
  for (int j = 0; j < p.k(); ++j)
    kappa += p.ds(j) * std::pow(p.r[j] / 4.0, a) * p.r[j] / std::exp(2.0 * std::lgamma(a + 1.0));
  return kappa / (4.0 * (a + 1.0) * (a + 1.0));
}

void bessel_amplitude(double alpha, double r, double ds, double eps, double& rho, double& drho) {
  const double z = std::sqrt(r * eps);
  const double amp = std::sqrt(std::fabs(ds));
  rho = amp * bessel_j(alpha, z);
  drho = amp * bessel_j_prime(alpha, z) * std::sqrt(r) / (2.0 * std::sqrt(eps));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double PainleveState::S() const {
  double s = 0.0;
  for (std::size_t j = 0; j < rho.size(); ++j) s += q2(static_cast<int>(j));
  return s;
}

double PainleveState::P() const {
  double s = 0.0;
  for (std::size_t j = 0; j < rho.size(); ++j) s += sigma[j] * rho[j] * drho[j];
  return s;
}

PainleveState seed(const ParameterSet& params, double eps) {
  params.validate();
  if (!(eps > 0.0)) throw ValidationError("seed: eps must be > 0");
  PainleveState st;
  st.xi = eps;
  const int k = params.k();
  st.rho.resize(k);
  st.drho.resize(k);
  st.sigma.resize(k);
  for (int j = 0; j < k; ++j) {
    st.sigma[j] = sign_of(params.ds(j));
    bessel_amplitude(params.alpha, params.r[j], params.ds(j), eps, st.rho[j], st.drho[j]);
  }
  const double one_minus_S = 1.0 - st.S();
  st.sigma0 = sign_of(one_minus_S);
  st.rho0 = std::sqrt(std::fabs(one_minus_S));
  st.drho0 = st.rho0 > 0.0 ? -st.P() / (st.sigma0 * st.rho0) : 0.0;
  return st;
}

PainleveState seed_corrected(const ParameterSet& params, double eps) {
  PainleveState st = seed(params, eps);
  const double a = params.alpha;
  const double kappa = seed_kappa(params);
  const double g = 1.0 + kappa * std::pow(eps, 1.0 + a);
  const double dg = kappa * (1.0 + a) * std::pow(eps, a);
  for (int j = 0; j < params.k(); ++j) {
    st.drho[j] = st.drho[j] * g + st.rho[j] * dg;
    st.rho[j] *= g;
  }
  if (a == 0.0) {
    // 1 - S -> s_1 at the origin; its first correction has the same rate kappa.
    const double s1 = params.s[0];
    st.sigma0 = sign_of(s1);
    st.rho0 = std::sqrt(std::fabs(s1)) * (1.0 + kappa * eps);
    st.drho0 = std::sqrt(std::fabs(s1)) * kappa;
  } else {
    const double one_minus_S = 1.0 - st.S();
    if (std::fabs(one_minus_S) < 1e-12)
      throw NumericalFailure("seed: 1 - S vanishes at eps for alpha != 0; choose a different eps");
    st.sigma0 = sign_of(one_minus_S);
    st.rho0 = std::sqrt(std::fabs(one_minus_S));
    st.drho0 = -st.P() / (st.sigma0 * st.rho0);
  }
  normalize(st);
  return st;
}

std::vector<double> accelerations(const PainleveState& st, const ParameterSet& params) {
  const int k = static_cast<int>(st.rho.size());
  const double xi = st.xi;
  if (!(xi > 0.0)) throw StiffnessSignal("accelerations: xi must be > 0");
  const double oms = 1.0 - st.S();
  if (std::fabs(oms) < 1e-10) throw StiffnessSignal("accelerations: |1 - S| < 1e-10");
  const double P = st.P();
  double Q2 = 0.0;
  for (int j = 0; j < k; ++j) Q2 += st.sigma[j] * st.drho[j] * st.drho[j];
  const double a2 = params.alpha * params.alpha;
  std::vector<double> R(k);
  double proj = 0.0;
  for (int j = 0; j < k; ++j) {
    const double rho = st.rho[j];
    R[j] = a2 * rho / 4.0 - xi * rho * oms * (P + xi * Q2) - xi * oms * oms * (st.drho[j] + params.r[j] * rho / 4.0) -
           xi * xi * rho * P * P;
    proj += st.sigma[j] * rho * R[j];
  }
  const double denom = xi * xi * oms * oms;
  std::vector<double> dd(k);
  for (int j = 0; j < k; ++j) dd[j] = (R[j] - st.rho[j] * proj) / denom;
  return dd;
}

SystemResidual system_residuals(const PainleveState& st, const std::vector<double>& ddrho,
                                const ParameterSet& params) {
  const int k = static_cast<int>(st.rho.size());
  const double xi = st.xi;
  const double oms = 1.0 - st.S();
  const double P = st.P();
  double sum_d = 0.0;  // sum sigma (xi rho rho')'
  for (int l = 0; l < k; ++l)
    sum_d += st.sigma[l] * (st.rho[l] * st.drho[l] + xi * st.drho[l] * st.drho[l] + xi * st.rho[l] * ddrho[l]);
  SystemResidual out;
  out.residual.resize(k);
  out.scale.resize(k);
  for (int j = 0; j < k; ++j) {
    const double rho = st.rho[j];
    const double t1 = xi * rho * oms * sum_d;
    const double t2 = xi * oms * oms * (st.drho[j] + xi * ddrho[j] + params.r[j] * rho / 4.0);
    const double t3 = xi * xi * rho * P * P;
    const double rhs = params.alpha * params.alpha * rho / 4.0;
    out.residual[j] = t1 + t2 + t3 - rhs;
    out.scale[j] = std::max({std::fabs(t1), std::fabs(t2), std::fabs(t3), std::fabs(rhs)});
  }
  return out;
}

double default_eps(const ParameterSet& params) {
  // The corrected seed is off by a relative O(eps^{2(1+alpha)}), so larger
  // alpha tolerates a larger eps and alpha < 0 needs a much smaller one.
  // Measured against the scalar equation, eps in [1e-6, 1e-3] gives the same
  // accuracy for alpha >= 1; the larger value saves steps.
  const double a = params.alpha;
  const double base = a < 0.0 ? 1e-11 : (a < 1.0 ? 1e-5 : 1e-4);
  return base * std::min(1.0, 1.0 / params.r.back());
}

std::vector<double> PainleveTrajectory::grid() const {
  std::vector<double> g;
  for (double t : sol_.grid()) g.push_back(std::exp(t));
  return g;
}

PainleveState PainleveTrajectory::state_at(double xi) const {
  const Vec y = sol_.state_at(std::log(xi));
  const int n = n_comp(), k = this->k();
  PainleveState st;
  st.xi = xi;
  st.sigma = sigma_;
  st.sigma0 = sigma0_;
  st.rho0 = y[0];
  st.drho0 = y[n] / xi;
  st.rho.resize(k);
  st.drho.resize(k);
  for (int j = 0; j < k; ++j) {
    st.rho[j] = y[j + 1];
    st.drho[j] = y[n + j + 1] / xi;
  }
  return st;
}

std::vector<double> PainleveTrajectory::second_derivatives(double xi) const {
  const Vec y = sol_.state_at(std::log(xi));
  const int n = n_comp(), k = this->k();
  const auto form = main_form(params_, sigma0_, sigma_);
  std::vector<double> dpi(n);
  form.accel(xi, y.data(), y.data() + n, dpi.data());
  std::vector<double> dd(k);
  for (int j = 0; j < k; ++j) dd[j] = (dpi[j + 1] - y[n + j + 1]) / (xi * xi);
  return dd;
}

double PainleveTrajectory::q2(int j, double xi) const {
  const Vec y = sol_.state_at(std::log(xi));
  return sigma_[j] * y[j + 1] * y[j + 1];
}

std::vector<double> PainleveTrajectory::mass(double xi) const {
  const Vec y = sol_.state_at(std::log(xi));
  const int n = n_comp(), k = this->k();
  return std::vector<double>(y.data() + 2 * n, y.data() + 2 * n + k);
}

std::vector<double> PainleveTrajectory::log_moment(double xi) const {
  const Vec y = sol_.state_at(std::log(xi));
  const int n = n_comp(), k = this->k();
  return std::vector<double>(y.data() + 2 * n + k, y.data() + 2 * n + 2 * k);
}

PainleveTrajectory integrate(const ParameterSet& params, double x_max, const PainleveOptions& opt) {
  params.validate();
  const double eps = opt.eps > 0.0 ? opt.eps : default_eps(params);
  if (!(x_max > eps)) throw ValidationError("integrate: need 0 < eps < x_max");
  const int k = params.k(), n = k + 1;
  const PainleveState st = seed_corrected(params, eps);
  const auto form = main_form(params, st.sigma0, st.sigma);

  Vec y0(2 * n + 2 * k);
  y0[0] = st.rho0;
  y0[n] = eps * st.drho0;
  for (int j = 0; j < k; ++j) {
    y0[j + 1] = st.rho[j];
    y0[n + j + 1] = eps * st.drho[j];
    const auto head = bessel_square_series(params.alpha, params.r[j], params.ds(j), seed_kappa(params));
    y0[2 * n + j] = head.integral(eps);
    y0[2 * n + k + j] = head.log_integral(eps);
  }

  const OdeRhs f = [&](double t, const Vec& y, Vec& dy) {
    const double xi = std::exp(t);
    dy.resize(y.size());
    for (int i = 0; i < n; ++i) dy[i] = y[n + i];
    form.accel(xi, y.data(), y.data() + n, dy.data() + n);
    for (int j = 0; j < k; ++j) {
      dy[2 * n + j] = xi * form.sigma[j + 1] * y[j + 1] * y[j + 1];
      dy[2 * n + k + j] = y[2 * n + j];
    }
  };
  double last_good = eps;
  bool blew_up = false;
  const StepCheck check = [&](double t, const Vec& y) {
    for (int i = 0; i < n; ++i)
      if (!(std::fabs(y[i]) <= opt.blowup)) {
        blew_up = true;
        return false;
      }
    last_good = std::exp(t);
    return true;
  };
  OdeOptions oo;
  oo.rtol = opt.tol;
  // rho_j and the quadrature states start at order eps^(alpha/2) and
  // eps^(alpha+1); a common absolute floor would swamp them for alpha >= 1,
  // so their floors follow the seed values.
  // rho_0 carries 1 - S and keeps the common floor.
  oo.atol_components = Vec::Constant(y0.size(), opt.tol * 1e-2);
  for (Eigen::Index i = 0; i < y0.size(); ++i)
    if (i != 0 && i != n && y0[i] != 0.0)
      oo.atol_components[i] = std::min(oo.atol_components[i], opt.tol * 1e-2 * std::fabs(y0[i]));
  auto res = dopri5(f, std::log(eps), y0, std::log(x_max), oo, check);
  if (res.status != OdeStatus::Completed) {
    const std::string why = blew_up ? "blow-up (|rho| > " + fmt(opt.blowup) + ")" : res.message;
    throw NumericalFailure("painleve integrate: " + why + "; last good xi = " + fmt(last_good));
  }
  PainleveTrajectory tr;
  tr.params_ = params;
  tr.eps_ = eps;
  tr.x_max_ = x_max;
  tr.sigma_ = st.sigma;
  tr.sigma0_ = st.sigma0;
  tr.sol_ = std::move(res.solution);
  return tr;
}

GenFnEvaluation genfn_painleve(const PainleveTrajectory& traj, double x) {
  if (!(x >= traj.eps() && x <= traj.x_max() * (1 + 1e-14)))
    throw DomainError("genfn_painleve: x outside the integrated range");
  const auto G = traj.log_moment(x);
  const auto A = traj.mass(x);
  GenFnEvaluation ev;
  ev.x = x;
  ev.log_weight.resize(G.size());
  for (std::size_t j = 0; j < G.size(); ++j) {
    ev.log_weight[j] = -traj.params().r[j] / 4.0 * G[j];
    ev.log_value += ev.log_weight[j];
    ev.dlog_dx -= traj.params().r[j] / (4.0 * x) * A[j];
  }
  ev.value = std::exp(ev.log_value);
  return ev;
}

GenFnEvaluation genfn_painleve(const ParameterSet& params, const PainleveOptions& opt) {
  params.validate();
  const double eps = opt.eps > 0.0 ? opt.eps : default_eps(params);
  if (params.x <= eps) {
    // Inside the seed region: use the head series directly.
    GenFnEvaluation ev;
    ev.x = params.x;
    const double kappa = seed_kappa(params);
    for (int j = 0; j < params.k(); ++j) {
      const auto head = bessel_square_series(params.alpha, params.r[j], params.ds(j), kappa);
      ev.log_weight.push_back(-params.r[j] / 4.0 * head.log_integral(params.x));
      ev.log_value += ev.log_weight.back();
      ev.dlog_dx -= params.r[j] / (4.0 * params.x) * head.integral(params.x);
    }
    ev.value = std::exp(ev.log_value);
    return ev;
  }
  return genfn_painleve(integrate(params, params.x, opt), params.x);
}

BFormView bform(const PainleveTrajectory& traj, const std::vector<double>& ys, double b0_floor) {
  const auto& p = traj.params();
  const int k = p.k(), n = k + 1;
  BFormView v;
  v.y = ys;
  v.b.assign(n, std::vector<double>(ys.size()));
  v.residual.assign(k, std::vector<double>(ys.size(), kNaN));
  v.u.assign(ys.size(), kNaN);
  v.sum_rule.assign(ys.size(), 0.0);
  const double a2 = p.alpha * p.alpha;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double y = ys[i], xi = y * y, t = std::log(xi);
    const Vec s = traj.dense().state_at(t);
    const Vec ds = traj.dense().derivative_at(t);  // d/dt of (rho, pi, ...)
    std::vector<double> b(n), b1(n), b2(n);
    double sb = 0.0, sb1 = 0.0, sb2 = 0.0;
    for (int j = 1; j <= k; ++j) {
      const double sg = traj.sigma()[j - 1];
      const double rho = s[j], pi = s[n + j], rhop = pi / xi, pi_xi = ds[n + j] / xi;
      b[j] = 0.5 * y * sg * rho * rho;
      b1[j] = sg * (0.5 * rho * rho + 2.0 * rho * pi);
      b2[j] = 2.0 * y * sg * (rho * rhop + 2.0 * rhop * pi + 2.0 * rho * pi_xi);
      sb += b[j];
      sb1 += b1[j];
      sb2 += b2[j];
    }
    b[0] = 0.5 * y - sb;
    b1[0] = 0.5 - sb1;
    b2[0] = -sb2;
    for (int j = 0; j < n; ++j) v.b[j][i] = b[j];
    // b_0 above is fixed by the sum rule; the integrated component 0 gives an
    // independent value, so the rule measures how well 1 - S = sigma0 rho0^2
    // is conserved along the trajectory.
    v.sum_rule[i] = 0.5 * y * traj.sigma0() * s[0] * s[0] + sb - 0.5 * y;
    if (std::fabs(b[0]) < b0_floor) continue;
    const double u = (a2 / 4.0 - b1[0] * b1[0] / 4.0 + b[0] * b2[0] / 2.0) / (b[0] * b[0]);
    v.u[i] = u;
    for (int j = 1; j <= k; ++j) {
      const double res = (u - p.r[j - 1]) * b[j] * b[j] + b1[j] * b1[j] / 4.0 - b[j] * b2[j] / 2.0;
      v.residual[j - 1][i] = res;
      v.max_residual = std::max(v.max_residual, std::fabs(res));
    }
  }
  return v;
}

BFormView bform(const PainleveTrajectory& traj, double y_min, double b0_floor) {
  std::vector<double> ys;
  for (double xi : traj.grid()) {
    const double y = std::sqrt(xi);
    if (y >= y_min) ys.push_back(y);
  }
  return bform(traj, ys, b0_floor);
}

// ---------------------------------------------------------------------------

namespace {

MultiplierForm tilde_form(double alpha, double r) { return MultiplierForm{{1, 1, 1}, {0.0, 1.0, r}, {alpha * alpha / 4.0, 1.0, 0.0}}; }

// Layout: rho0 rho1 rho2 | pi0 pi1 pi2 | A1 A2 | G1 G2 | W
constexpr int kTildeDim = 11;

struct TildeRun {
  OdeResult res;
  int collapsed = -1;  // component that reached zero, -1 if none
  bool completed = false;
  double reach = 0.0;
};

struct TildeSeedParts {
  double c, d1, p, d0, gamma;
};

TildeSeedParts tilde_parts(double alpha) {
  const double b = alpha + 2.0;
  TildeSeedParts s;
  s.c = std::sqrt(2.0 / b);
  s.p = std::sqrt(alpha / b);
  s.d1 = alpha / (4.0 * b * (b * b - 1.0));
  s.d0 = -(2.0 / b) / (4.0 * (b * b - 1.0));
  s.gamma = (2.0 / b) / (4.0 * (alpha + 3.0));
  return s;
}

double tilde_eps(double alpha, const TildeOptions& opt) {
  if (opt.eps > 0.0) return opt.eps;
  return alpha == 0.0 ? 1e-6 : 1e-3;
}

TildeRun tilde_run(double alpha, double r, double kappa, const TildeOptions& opt) {
  const auto sp = tilde_parts(alpha);
  const double eps = tilde_eps(alpha, opt), b = alpha + 2.0;
  double r2, dr2;
  bessel_amplitude(alpha + 2.0, r, 1.0, eps, r2, dr2);
  const double f2 = (1.0 - 1.0 / r), g2 = 1.0 + sp.gamma * eps;
  dr2 = f2 * (dr2 * g2 + r2 * sp.gamma);
  r2 = f2 * r2 * g2;
  double r1 = sp.c * (1.0 + sp.d1 * eps + kappa * std::pow(eps, b));
  double dr1 = sp.c * (sp.d1 + kappa * b * std::pow(eps, b - 1.0));
  double r0 = 0.0, dr0 = 0.0;
  if (alpha == 0.0) {
    r1 = std::sqrt(1.0 - r2 * r2);
    dr1 = -r2 * dr2 / r1;
  } else {
    const double rest = 1.0 - r1 * r1 - r2 * r2;
    if (!(rest > 0.0)) throw NumericalFailure("tilde seed: no room for component 0");
    r0 = std::sqrt(rest);
    dr0 = -(r1 * dr1 + r2 * dr2) / r0;
  }
  Vec y0(kTildeDim);
  y0 << r0, r1, r2, eps * dr0, eps * dr1, eps * dr2, 0, 0, 0, 0, 0;
  const double c2 = sp.c * sp.c;
  const double lead2 = std::pow(f2 * std::exp((b / 2.0) * std::log(r / 4.0) - std::lgamma(b + 1.0)), 2);
  y0[6] = c2 * (eps + sp.d1 * eps * eps);
  y0[7] = lead2 * std::pow(eps, b + 1.0) / (b + 1.0);
  y0[8] = c2 * (eps + 0.5 * sp.d1 * eps * eps);
  y0[9] = lead2 * std::pow(eps, b + 1.0) / ((b + 1.0) * (b + 1.0));
  y0[10] = std::pow(eps, alpha + 1.0) / (alpha + 1.0);

  const auto form = tilde_form(alpha, r);
  const OdeRhs f = [&](double t, const Vec& y, Vec& dy) {
    const double xi = std::exp(t);
    dy.resize(kTildeDim);
    for (int i = 0; i < 3; ++i) dy[i] = y[3 + i];
    form.accel(xi, y.data(), y.data() + 3, dy.data() + 3);
    dy[6] = xi * y[1] * y[1];
    dy[7] = xi * y[2] * y[2];
    dy[8] = y[6];
    dy[9] = y[7];
    const double I = -(y[8] + r * y[9]) / 4.0;
    dy[10] = std::exp((alpha + 1.0) * t + I);
  };
  TildeRun run;
  const StepCheck check = [&](double t, const Vec& y) {
    run.reach = std::exp(t);
    if (alpha != 0.0 && y[0] < 1e-3) {
      run.collapsed = 0;
      return false;
    }
    if (y[1] < 1e-3) {
      run.collapsed = 1;
      return false;
    }
    const double I = -(y[8] + r * y[9]) / 4.0;
    if (t > 0.0 && std::exp((alpha + 1.0) * t + I) < opt.outer_tol * y[10]) {
      run.completed = true;
      return false;
    }
    return true;
  };
  OdeOptions oo;
  oo.rtol = opt.tol;
  oo.atol = opt.tol * 1e-2;
  run.res = dopri5(f, std::log(eps), y0, std::log(opt.x_max), oo, check);
  if (run.res.status == OdeStatus::Completed) run.completed = true;
  return run;
}

}  // namespace

TildeState tilde_seed(double alpha, double r, double eps) {
  if (!(r > 1.0)) throw ValidationError("tilde system requires r > 1");
  const auto sp = tilde_parts(alpha);
  TildeState st;
  st.xi = eps;
  st.r = r;
  double r2, dr2;
  bessel_amplitude(alpha + 2.0, r, 1.0, eps, r2, dr2);
  const double f2 = 1.0 - 1.0 / r, g2 = 1.0 + sp.gamma * eps;
  st.q2 = f2 * r2 * g2;
  st.dq2 = f2 * (dr2 * g2 + r2 * sp.gamma);
  if (alpha == 0.0) {
    st.q1 = std::sqrt(1.0 - st.q2 * st.q2);
    st.dq1 = -st.q2 * st.dq2 / st.q1;
  } else {
    st.q1 = sp.c * (1.0 + sp.d1 * eps);
    st.dq1 = sp.c * sp.d1;
  }
  return st;
}

TildeTrajectory tilde_integrate(double alpha, double r, const TildeOptions& opt) {
  if (!(r > 1.0)) throw ValidationError("tilde system requires r > 1");
  if (!(alpha >= 0.0)) throw ValidationError("tilde system is implemented for alpha >= 0");
  TildeTrajectory tr;
  tr.alpha_ = alpha;
  tr.r_ = r;
  tr.eps_ = tilde_eps(alpha, opt);
  auto finish = [&](TildeRun& run, double kappa) {
    tr.kappa_ = kappa;
    tr.completed_ = run.completed;
    tr.sol_ = std::move(run.res.solution);
    if (tr.sol_.steps() == 0) throw NumericalFailure("tilde_integrate: no accepted steps");
    return tr;
  };
  if (alpha == 0.0) {
    auto run = tilde_run(alpha, r, 0.0, opt);
    if (run.res.status == OdeStatus::Failed) throw NumericalFailure("tilde_integrate: " + run.res.message);
    return finish(run, 0.0);
  }
  double lo = -50.0, hi = 50.0;
  auto run_lo = tilde_run(alpha, r, lo, opt);
  auto run_hi = tilde_run(alpha, r, hi, opt);
  if (run_lo.completed) return finish(run_lo, lo);
  if (run_hi.completed) return finish(run_hi, hi);
  if (run_lo.collapsed == run_hi.collapsed)
    throw NumericalFailure("tilde_integrate: shooting bracket does not separate the collapse directions");
  const int side_lo = run_lo.collapsed;
  TildeRun best = run_lo.reach > run_hi.reach ? std::move(run_lo) : std::move(run_hi);
  double best_kappa = best.reach == run_lo.reach ? lo : hi;
  for (int it = 0; it < opt.shooting_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto run = tilde_run(alpha, r, mid, opt);
    if (run.completed) return finish(run, mid);
    const bool better = run.reach > best.reach;
    const int side = run.collapsed;
    if (side == side_lo) lo = mid;
    else hi = mid;
    if (better) {
      best = std::move(run);
      best_kappa = mid;
    }
  }
  return finish(best, best_kappa);
}

TildeState TildeTrajectory::state_at(double xi) const {
  const Vec y = sol_.state_at(std::log(xi));
  TildeState st;
  st.xi = xi;
  st.r = r_;
  st.q1 = y[1];
  st.dq1 = y[4] / xi;
  st.q2 = y[2];
  st.dq2 = y[5] / xi;
  return st;
}

double TildeTrajectory::I(double x) const {
  const Vec y = sol_.state_at(std::log(x));
  return -(y[8] + r_ * y[9]) / 4.0;
}

double TildeTrajectory::W(double x) const { return sol_.state_at(std::log(x))[10]; }

double tilde_I(const TildeTrajectory& traj, double x) {
  if (x < traj.eps()) {
    // head: q1^2 ~ 2/(alpha+2), q2 negligible
    return -(2.0 / (traj.alpha() + 2.0)) * x / 4.0;
  }
  return traj.I(x);
}

double ratio_Q_integrand(double alpha, double r, double x, double h) {
  BesselKernel kernel(BesselKernelSpec{alpha});
  // m from the convergence of the centre point, then held fixed on the stencil
  GenFnOptions go;
  go.m0 = 12;
  go.tol = 1e-13;
  go.max_doublings = 5;
  const int m = generating_fn(kernel, {x, r * x}, {cplx(0.0), cplx(0.0)}, go).m_final;
  auto F = [&](const DiscretizedOperator& op, double s) { return fredholm_det(op, {cplx(s), cplx(0.0)}).value.real(); };
  const auto up = discretize({(1.0 + h) * x, r * x}, kernel, m);
  const auto dn = discretize({(1.0 - h) * x, r * x}, kernel, m);
  const double mixed = (F(up, h) - F(up, -h) - F(dn, h) + F(dn, -h)) / (4.0 * h * h);
  return mixed / x;
}

RatioQResult ratio_Q(double alpha, double r, const RatioQOptions& opt) {
  if (!(r > 1.0)) throw ValidationError("ratio_Q: r must be > 1");
  RatioQResult out;
  const double norm = std::exp((alpha + 1.0) * std::log(4.0) + std::lgamma(1.0 + alpha) + std::lgamma(2.0 + alpha));
  const auto tr = tilde_integrate(alpha, r, opt.tilde);
  out.tilde_completed = tr.completed();
  out.x_cut_tilde = tr.x_end();
  out.q_tilde = tr.W(tr.x_end()) / norm;
  if (!opt.fredholm_route) return out;

  // Truncate where the gap probability of (0, X) is negligible: the integrand
  // is bounded by the density of the smallest particle.
  BesselKernel kernel(BesselKernelSpec{alpha});
  double X = 4.0;
  for (int i = 0; i < 12; ++i) {
    GenFnOptions go;
    go.m0 = 16;
    go.tol = 1e-15;
    go.max_doublings = 5;
    const double gap = generating_fn(kernel, {X}, {cplx(0.0)}, go).value();
    if (std::fabs(gap) < opt.tail_tol) break;
    X *= 2.0;
  }
  out.x_cut_fredholm = X;
  auto g = [&](double x) { return x <= 0.0 ? 0.0 : ratio_Q_integrand(alpha, r, x, opt.fd_step); };
  double err = 0.0;
  out.q_fredholm = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, X, 12, opt.quad_tol, &err);
  out.discrepancy = std::fabs(out.q_tilde - out.q_fredholm);
  return out;
}

}  // namespace besselgap

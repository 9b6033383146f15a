#include "besselgap/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "besselgap/error.hpp"

namespace besselgap {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, const Vec& atol, double rtol) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = atol[i] + rtol * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
    s += (err[i] / sc) * (err[i] / sc);
  }
  return std::sqrt(s / static_cast<double>(err.size()));
}

}  // namespace

void DenseSolution::set_start(double t0, const Vec& y0) {
  t_.assign(1, t0);
  y_.assign(1, y0);
  h_.clear();
  rc_.clear();
}

void DenseSolution::append(double t, double h, const std::array<Vec, 5>& rcont, const Vec& y_end) {
  h_.push_back(h);
  rc_.push_back(rcont);
  t_.push_back(t + h);
  y_.push_back(y_end);
}

int DenseSolution::locate(double t) const {
  if (h_.empty()) throw NumericalFailure("DenseSolution: no steps stored");
  const bool fwd = h_.front() > 0;
  const double lo = fwd ? t_.front() : t_.back(), hi = fwd ? t_.back() : t_.front();
  const double slack = 1e-12 * std::max(1.0, std::fabs(hi - lo));
  if (t < lo - slack || t > hi + slack) {
    std::ostringstream os;
    os.precision(17);
    os << "DenseSolution: t = " << t << " outside [" << lo << ", " << hi << "]";
    throw DomainError(os.str());
  }
  int i;
  if (fwd) i = static_cast<int>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin()) - 1;
  else i = static_cast<int>(std::upper_bound(t_.begin(), t_.end(), t, std::greater<double>()) - t_.begin()) - 1;
  return std::clamp(i, 0, steps() - 1);
}

Vec DenseSolution::state_at(double t) const {
  const int i = locate(t);
  if (t == t_[i]) return y_[i];
  if (t == t_[i + 1]) return y_[i + 1];
  const auto& rc = rc_[i];
  const double th = (t - t_[i]) / h_[i], th1 = 1.0 - th;
  return rc[0] + th * (rc[1] + th1 * (rc[2] + th * (rc[3] + th1 * rc[4])));
}

Vec DenseSolution::derivative_at(double t) const {
  const int i = locate(t);
  const auto& rc = rc_[i];
  const double th = (t - t_[i]) / h_[i], th1 = 1.0 - th;
  const Vec A = rc[3] + th1 * rc[4];
  const Vec B = rc[2] + th * A;
  const Vec C = rc[1] + th1 * B;
  const Vec dB = A - th * rc[4];
  const Vec dC = -B + th1 * dB;
  return (C + th * dC) / h_[i];
}

OdeResult dopri5(const OdeRhs& f, double t0, const Vec& y0, double t1, const OdeOptions& opt,
                 const StepCheck& check) {
  OdeResult res;
  const int n = static_cast<int>(y0.size());
  res.solution = DenseSolution(n);
  res.solution.set_start(t0, y0);
  const double span = std::fabs(t1 - t0);
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  const double hmin = opt.h_min * std::max(span, 1e-300);
  if (opt.atol_components.size() != 0 && opt.atol_components.size() != n)
    throw ValidationError("dopri5: atol_components must match the state size");
  const Vec atol = opt.atol_components.size() != 0 ? opt.atol_components : Vec::Constant(n, opt.atol);

  Vec y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ys(n), ynew(n), err(n);
  auto eval = [&](double t, const Vec& yy, Vec& out) { f(t, yy, out); };

  try {
    eval(t0, y, k1);
  } catch (const StiffnessSignal& e) {
    res.status = OdeStatus::Failed;
    res.message = std::string("singular right-hand side at the initial point: ") + e.what();
    return res;
  }

  double h = opt.h_initial;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic, first stage only
    double d0 = 0, dd1 = 0;
    for (int i = 0; i < n; ++i) {
      const double sc = atol[i] + opt.rtol * std::fabs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      dd1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / n);
    dd1 = std::sqrt(dd1 / n);
    h = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
    h = std::min(h, 0.1 * span);
  }
  h = std::min(h, span);

  double t = t0;
  bool last_rejected = false;
  while (dir * (t1 - t) > 0.0) {
    if (res.accepted + res.rejected >= opt.max_steps) {
      res.status = OdeStatus::Failed;
      res.message = "maximum number of steps exceeded";
      return res;
    }
    bool final_step = false;
    if (h >= std::fabs(t1 - t)) {
      h = std::fabs(t1 - t);
      final_step = true;
    }
    const double hs = dir * h;
    double errn;
    try {
      ys = y + hs * a21 * k1;
      eval(t + c2 * hs, ys, k2);
      ys = y + hs * (a31 * k1 + a32 * k2);
      eval(t + c3 * hs, ys, k3);
      ys = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
      eval(t + c4 * hs, ys, k4);
      ys = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      eval(t + c5 * hs, ys, k5);
      ys = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      eval(t + hs, ys, k6);
      ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      eval(t + hs, ynew, k7);
      err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      errn = error_norm(err, y, ynew, atol, opt.rtol);
      if (!std::isfinite(errn)) throw StiffnessSignal("non-finite stage values");
    } catch (const StiffnessSignal& e) {
      ++res.rejected;
      h *= 0.5;
      if (h < hmin) {
        std::ostringstream os;
        os.precision(17);
        os << "step size fell below the floor near t = " << t << " (" << e.what() << ")";
        res.status = OdeStatus::Failed;
        res.message = os.str();
        return res;
      }
      last_rejected = true;
      continue;
    }

    if (errn <= 1.0) {
      std::array<Vec, 5> rc;
      const Vec ydiff = ynew - y;
      const Vec bspl = hs * k1 - ydiff;
      rc[0] = y;
      rc[1] = ydiff;
      rc[2] = bspl;
      rc[3] = ydiff - hs * k7 - bspl;
      rc[4] = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      res.solution.append(t, hs, rc, ynew);
      t = final_step ? t1 : t + hs;
      y = ynew;
      k1 = k7;
      ++res.accepted;
      if (check && !check(t, y)) {
        res.status = OdeStatus::Stopped;
        res.message = "stopped by step check";
        return res;
      }
      double fac = 0.9 * std::pow(std::max(errn, 1e-10), -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
      h *= fac;
      last_rejected = false;
    } else {
      ++res.rejected;
      h *= std::max(0.2, 0.9 * std::pow(errn, -0.2));
      last_rejected = true;
      if (h < hmin) {
        std::ostringstream os;
        os.precision(17);
        os << "step size fell below the floor near t = " << t;
        res.status = OdeStatus::Failed;
        res.message = os.str();
        return res;
      }
    }
  }
  res.status = OdeStatus::Completed;
  return res;
}

}  // namespace besselgap

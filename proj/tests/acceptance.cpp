// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "besselgap/apps.hpp"
#include "besselgap/fredholm.hpp"
#include "besselgap/lue.hpp"
#include "besselgap/painleve.hpp"
#include "besselgap/specfun.hpp"
#include "oracles.hpp"

using namespace besselgap;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Random admissible (r, s): increasing r in (0.25, 2.5) with gaps >= 0.1 and
// multipliers in [0, 1] with |s_j - s_{j+1}| >= 0.05 (s_{k+1} = 1).
ParameterSet random_config(std::mt19937_64& gen, double alpha, int k) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  ParameterSet p;
  p.alpha = alpha;
  for (;;) {
    p.r.clear();
    for (int j = 0; j < k; ++j) p.r.push_back(0.25 + 2.25 * U(gen));
    std::sort(p.r.begin(), p.r.end());
    bool ok = true;
    for (int j = 1; j < k; ++j) ok = ok && p.r[j] - p.r[j - 1] >= 0.1;
    if (ok) break;
  }
  for (;;) {
    p.s.clear();
    for (int j = 0; j < k; ++j) p.s.push_back(U(gen));
    bool ok = true;
    for (int j = 0; j < k; ++j) ok = ok && std::fabs(p.ds(j)) >= 0.05;
    if (ok) break;
  }
  return p;
}

std::vector<ParameterSet> route_configs() {
  std::mt19937_64 gen(20240601);
  std::vector<ParameterSet> out;
  for (double alpha : {0.0, 0.5, 2.0})
    for (int k = 1; k <= 3; ++k)
      for (int i = 0; i < 5; ++i) out.push_back(random_config(gen, alpha, k));
  return out;
}

std::string describe(const ParameterSet& p) {
  std::string s = "alpha=" + fmt("%g", p.alpha) + " r=(";
  for (int j = 0; j < p.k(); ++j) s += (j ? "," : "") + fmt("%.4g", p.r[j]);
  s += ") s=(";
  for (int j = 0; j < p.k(); ++j) s += (j ? "," : "") + fmt("%.4g", p.s[j]);
  return s + ")";
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// 1. determinant and coupled system agree
Outcome route_equivalence() {
  constexpr double kTol = 1e-6;
  double worst = 0.0;
  std::string where;
  int failures = 0;
  for (const auto& base : route_configs()) {
    ParameterSet p = base;
    p.x = 4.0;
    try {
      const auto tr = integrate(p, 4.0);
      for (double x : {0.5, 1.0, 4.0}) {
        const double pv = genfn_painleve(tr, x).value;
        const double fr = generating_fn(p.at(x)).value();
        if (std::fabs(pv - fr) > worst) {
          worst = std::fabs(pv - fr);
          where = describe(p) + " x=" + fmt("%g", x);
        }
      }
    } catch (const std::exception& e) {
      ++failures;
      where = describe(p) + ": " + e.what();
    }
  }
  return {failures == 0 && worst <= kTol, "45 configs x 3 points, max |F_fredholm - F_painleve| = " + fmt("%.2e", worst) +
                                              " (tol 1e-6), integration failures " + std::to_string(failures) +
                                              "; worst at " + where};
}

// 2. one component against an independent scalar integration
Outcome scalar_reduction() {
  constexpr double kTol = 1e-8;
  std::vector<double> xs;
  for (int i = 1; i <= 400; ++i) xs.push_back(0.01 * i);
  std::string detail;
  bool pass = true;
  // alpha = 0, s1 = 0 is the stated case, where q = 1 exactly; the other
  // (alpha, s1) pairs make the comparison non-trivial and gate as well.
  const std::vector<std::pair<double, double>> cases = {{0.0, 0.0}, {0.0, 0.3}, {0.0, 0.6}, {0.5, 0.3}, {2.0, 0.3}};
  for (auto [alpha, s] : cases) {
    const ParameterSet p{alpha, {1.0}, {s}, 4.0};
    const auto tr = integrate(p, 4.0);
    const auto ref = oracle::scalar_pv_q2(alpha, s, xs);
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double q2 = xs[i] < tr.eps() ? seed_corrected(p, xs[i]).q2(0) : tr.q2(0, xs[i]);
      worst = std::max(worst, std::fabs(q2 - ref[i]));
    }
    pass = pass && worst <= kTol;
    detail += (detail.empty() ? "" : ", ") + fmt("(%g,", alpha) + fmt("%g)", s) + ": " + fmt("%.2e", worst);
  }
  return {pass, "xi in (0,4], max |q^2 - q^2_scalar| by (alpha,s1) " + detail + " (tol 1e-8)"};
}

// 3. small-x rate of F - 1 + sum (s_{j+1} - s_j) J_{alpha+1}^2
Outcome small_x_rate() {
  std::string detail;
  bool pass = true;
  for (auto [alpha, expect, tol] : {std::tuple{0.0, 2.0, 0.15}, std::tuple{0.5, 2.5, 0.2}}) {
    const ParameterSet base{alpha, {1.0, 2.0}, {0.3, 0.7}, 1.0};
    std::vector<double> xs, ds;
    for (int i = 0; i <= 8; ++i) {
      const double x = std::pow(10.0, -4.0 + 0.25 * i);
      double lead = 1.0;
      for (int j = 0; j < base.k(); ++j) lead -= base.ds(j) * std::pow(bessel_j(alpha + 1.0, std::sqrt(base.r[j] * x)), 2);
      xs.push_back(x);
      ds.push_back(std::fabs(generating_fn(base.at(x)).value() - lead));
    }
    const double slope = loglog_slope(xs, ds);
    pass = pass && std::fabs(slope - expect) <= tol;
    detail += (detail.empty() ? "" : "; ") + std::string("alpha=") + fmt("%g", alpha) + " slope " + fmt("%.4f", slope) +
              " (expect " + fmt("%g", expect) + " +- " + fmt("%g", tol) + ")";
  }
  return {pass, "r=(1,2) s=(0.3,0.7), x in [1e-4,1e-2]: " + detail};
}

// 4. decay rates near degenerate configurations
Outcome degenerate_rates() {
  const ParameterSet base{0.0, {1.0, 2.0}, {0.3, 0.7}, 1.0};
  const std::vector<double> deltas{1e-4, 1e-3};
  bool pass = true;
  std::string detail;
  for (int j : {1, 2}) {
    const auto pr = degenerate_probe(DegenerateKind::SMerge, base, j, deltas);
    const double sl = pr.slopes.empty() ? std::nan("") : pr.slopes[0];
    pass = pass && std::fabs(sl - 1.0) <= 0.1;
    detail += "s-merge j=" + std::to_string(j) + " slope " + fmt("%.4f", sl) + "; ";
  }
  const auto rm = degenerate_probe(DegenerateKind::RMerge, base, 2, deltas);
  const double rsl = rm.slopes.empty() ? std::nan("") : rm.slopes[0];
  const double split = rm.rows[1].split_error;
  pass = pass && rm.rows[1].ok && split <= 0.01 && std::fabs(rsl - 1.0) <= 0.1;
  detail += "r-merge split error at 1e-3 " + fmt("%.2e", split) + ", slope " + fmt("%.4f", rsl) + "; ";
  const auto z = degenerate_probe(DegenerateKind::R1ToZero, ParameterSet{0.5, {1.0, 2.0}, {0.3, 0.7}, 1.0}, 1, deltas);
  const double zsl = z.slopes.empty() ? std::nan("") : z.slopes[0];
  pass = pass && std::fabs(zsl - 0.5) <= 0.1;
  detail += "r1 -> 0 at alpha=0.5 slope " + fmt("%.4f", zsl);
  return {pass, detail + " (slopes 1 +- 0.1, split 1%, r1 slope alpha +- 0.1)"};
}

// 5. b-form residuals and sum rule
Outcome bform_consistency() {
  constexpr double kResTol = 1e-6, kSumTol = 1e-8;
  double worst_res = 0.0, worst_sum = 0.0;
  long checked = 0, skipped = 0;
  std::vector<double> ys;
  for (int i = 0; i <= 200; ++i) ys.push_back(std::sqrt(0.1) + (2.0 - std::sqrt(0.1)) * i / 200.0);
  for (const auto& base : route_configs()) {
    ParameterSet p = base;
    p.x = 4.0;
    const auto tr = integrate(p, 4.0);
    for (const auto& v : {bform(tr, ys), bform(tr, std::sqrt(0.1))}) {
      worst_res = std::max(worst_res, v.max_residual);
      for (double d : v.sum_rule) worst_sum = std::max(worst_sum, std::fabs(d));
      for (const auto& row : v.residual)
        for (double r : row) std::isnan(r) ? ++skipped : ++checked;
    }
  }
  return {worst_res <= kResTol && worst_sum <= kSumTol && checked > 0,
          "criterion-1 configs on xi in [0.1,4]: max residual " + fmt("%.2e", worst_res) + " (tol 1e-6), max sum-rule defect " +
              fmt("%.2e", worst_sum) + " (tol 1e-8), " + std::to_string(checked) + " residuals checked, " +
              std::to_string(skipped) + " skipped where |b_0| < 1e-8"};
}

// 6. count distribution
Outcome count_sanity() {
  bool pass = true;
  std::string detail;
  for (double x : {1.0, 5.0, 10.0}) {
    const auto d = count_distribution(0.0, x, 32);
    double total = 0.0, mean = 0.0, low = 0.0;
    for (int m = 0; m < d.N; ++m) {
      total += d.p_raw[m];
      mean += m * d.p_raw[m];
      low = std::min(low, d.p_raw[m]);
    }
    const double dm = std::fabs(mean - oracle::mean_count(0.0, x));
    pass = pass && std::fabs(total - 1.0) <= 1e-8 && low >= -1e-10 && dm <= 1e-6;
    detail += (detail.empty() ? "" : "; ") + std::string("x=") + fmt("%g", x) + " |sum-1| " + fmt("%.1e", std::fabs(total - 1.0)) +
              " min P " + fmt("%.1e", low) + " |mean-trace| " + fmt("%.1e", dm);
  }
  return {pass, "alpha=0, N=32: " + detail + " (tol 1e-8, -1e-10, 1e-6)"};
}

// 7. finite-n identities
Outcome finite_n() {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int n = 1 + i % 8;
    const double alpha = std::vector<double>{0.0, 0.5, 1.0, 2.5}[i % 4];
    const int k = 1 + i % 3;
    std::vector<double> lam, s;
    double at = 0.0;
    for (int j = 0; j < k; ++j) {
      at += 0.2 + 2.0 * U(gen);
      lam.push_back(at);
      s.push_back(U(gen));
    }
    const double h = hankel_ratio(n, alpha, lam, s).value;
    const double f = lue_genfn(LueModel::make(n, alpha), lam, s).value();
    worst = std::max(worst, std::fabs(f - h) / std::fabs(h));
  }
  const ParameterSet fixed{0.0, {1.0, 2.0}, {0.3, 0.7}, 1.0};
  const double limit = generating_fn(fixed).value();
  std::vector<double> dev;
  for (int n : {25, 50, 100}) {
    std::vector<double> lam;
    for (double e : fixed.endpoints()) lam.push_back(e / (4.0 * n));
    dev.push_back(std::fabs(lue_genfn(LueModel::make(n, 0.0), lam, fixed.s).value() - limit));
  }
  const bool decreasing = dev[0] > dev[1] && dev[1] > dev[2];
  return {worst <= 1e-8 && decreasing, "20 configs n<=8, max rel |F_n - Hankel| " + fmt("%.2e", worst) +
                                           " (tol 1e-8); hard-edge deviation n=25,50,100: " + fmt("%.2e", dev[0]) + ", " +
                                           fmt("%.2e", dev[1]) + ", " + fmt("%.2e", dev[2]) + " (strictly decreasing)"};
}

// 8. ratio of the two smallest particles
Outcome ratio_q() {
  std::string detail;
  bool pass = true;
  for (double r : {2.0, 4.0}) {
    const auto q = ratio_Q(0.0, r);
    pass = pass && q.discrepancy <= 1e-4;
    detail += "r=" + fmt("%g", r) + " tilde " + fmt("%.8f", q.q_tilde) + " fd " + fmt("%.8f", q.q_fredholm) + " diff " +
              fmt("%.1e", q.discrepancy) + "; ";
  }
  RatioQOptions only_tilde;
  only_tilde.fredholm_route = false;
  double prev = 2.0;
  bool monotone = true;
  detail += "Q on r=1.2,2,4,8:";
  for (double r : {1.2, 2.0, 4.0, 8.0}) {
    const double q = ratio_Q(0.0, r, only_tilde).q_tilde;
    monotone = monotone && q <= prev;
    prev = q;
    detail += " " + fmt("%.6f", q);
  }
  return {pass && monotone, "alpha=0: " + detail + " (tol 1e-4, nonincreasing)"};
}

// 9. Monte Carlo
Outcome monte_carlo() {
  const auto xs = sample_scaled_smallest(100, 0.0, 2000, 1000);
  const double ks = ks_smallest(0.0, xs);
  return {ks <= 0.05, "n=100, 2000 draws (seeds 1000..2999), KS distance " + fmt("%.4f", ks) + " (tol 0.05)"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"route equivalence", route_equivalence},
      {"single-component reduction", scalar_reduction},
      {"small-x expansion rate", small_x_rate},
      {"degenerate-limit rates", degenerate_rates},
      {"b-form consistency", bform_consistency},
      {"count distribution", count_sanity},
      {"finite-n identities", finite_n},
      {"two-smallest ratio", ratio_q},
      {"Monte Carlo hard edge", monte_carlo},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s  %zu  %-27s  %s  [%.2fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

#include "besselgap/apps.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "besselgap/error.hpp"
#include "besselgap/kernels.hpp"
#include "besselgap/lue.hpp"
#include "besselgap/quadrature.hpp"

namespace besselgap {

namespace {

constexpr double kProbSlack = 1e-9;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

cplx root_of_unity(int k, int N) {
  const double t = 2.0 * std::numbers::pi * k / N;
  return {std::cos(t), std::sin(t)};
}

// m at which F converges for the widest multiplier on the unit circle
// (|1 - s| = 2 at s = -1); the same rule then serves every root of unity.
int extraction_m(const Kernel& kernel, const std::vector<double>& endpoints) {
  GenFnOptions go;
  go.m0 = 16;
  go.tol = 1e-13;
  go.max_doublings = 5;
  return generating_fn(kernel, endpoints, std::vector<cplx>(endpoints.size(), cplx(-1.0)), go).m_final;
}

double clamp_prob(double v, int& clamped) {
  if (v < -kProbSlack || v > 1.0 + kProbSlack) ++clamped;
  return std::clamp(v, 0.0, 1.0);
}

RouteResult two_routes(const ParameterSet& params, const RouteOptions& opt) {
  params.validate();
  RouteResult out;
  const auto f = generating_fn(params, opt.genfn);
  out.m_final = f.m_final;
  const double fred = f.value();
  out.fredholm = clamp_prob(fred, out.clamped);
  if (!opt.painleve_route) return out;
  out.eps = opt.painleve.eps > 0.0 ? opt.painleve.eps : default_eps(params);
  try {
    const double pv = genfn_painleve(params, opt.painleve).value;
    out.painleve = clamp_prob(pv, out.clamped);
    out.discrepancy = std::fabs(fred - pv);
    out.painleve_ok = true;
  } catch (const NumericalFailure& e) {
    out.painleve_message = e.what();
    out.painleve = std::nan("");
    out.discrepancy = std::nan("");
  }
  return out;
}

}  // namespace

int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  if (const char* env = std::getenv("BESSELGAP_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto run = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

double CountDistribution::total() const {
  double t = 0.0;
  for (double v : p) t += v;
  return t;
}

double CountDistribution::mean() const {
  double t = 0.0;
  for (std::size_t m = 0; m < p.size(); ++m) t += m * p[m];
  return t;
}

CountDistribution count_distribution(double alpha, double x, int N, const ExtractionOptions& opt) {
  if (!(alpha > -1.0)) throw ValidationError("alpha must be > -1");
  if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("x must be finite and > 0");
  if (N < 8 || !is_pow2(N)) throw ValidationError("N must be a power of two >= 8");

  BesselKernel kernel(BesselKernelSpec{alpha});
  CountDistribution out;
  out.alpha = alpha;
  out.x = x;
  out.N = N;
  out.m_final = extraction_m(kernel, std::vector<double>{x});
  const auto op = discretize(std::vector<double>{x}, kernel, out.m_final);

  std::vector<cplx> values(N);
  parallel_for(N, resolve_jobs(opt.jobs), [&](std::size_t k) {
    values[k] = fredholm_det(op, {root_of_unity(static_cast<int>(k), N)}).value;
  });

  out.p_raw.resize(N);
  for (int m = 0; m < N; ++m) {
    cplx acc = 0.0;
    for (int k = 0; k < N; ++k) acc += values[k] * root_of_unity(-((k * m) % N), N);
    out.p_raw[m] = acc.real() / N;
  }
  // Aliasing adds P(m + N) + P(m + 2N) + ... to each entry; with
  // super-exponential decay the trailing coefficient bounds it.
  out.tail = std::fabs(out.p_raw[N - 1]);
  if (out.tail > opt.tol) {
    std::ostringstream os;
    os << "count_distribution: trailing coefficient " << out.tail << " exceeds tol " << opt.tol
       << "; increase N (currently " << N << ")";
    throw NumericalFailure(os.str());
  }
  out.p.resize(N);
  for (int m = 0; m < N; ++m) {
    if (out.p_raw[m] < -1e-10) ++out.clamped;
    out.p[m] = std::max(0.0, out.p_raw[m]);
  }
  return out;
}

double expected_count(double alpha, double x) {
  if (!(alpha > -1.0)) throw ValidationError("alpha must be > -1");
  if (!(x > 0.0)) throw ValidationError("x must be > 0");
  // K(u,u) = u^alpha * smooth; integrate the smooth part against u^alpha.
  const BesselKernelSpec spec{alpha};
  auto integrate = [&](int m) {
    const auto rule = gauss_jacobi_origin(m, alpha, x);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double u = rule.nodes[i];
      acc += rule.weights[i] * bessel_kernel(spec, u, u) / std::pow(u, alpha);
    }
    return acc;
  };
  double prev = integrate(32);
  for (int m = 64; m <= 1024; m *= 2) {
    const double cur = integrate(m);
    if (std::fabs(cur - prev) <= 1e-13 * std::max(1.0, std::fabs(cur))) return cur;
    prev = cur;
  }
  throw NumericalFailure("expected_count: quadrature did not converge");
}

double kth_smallest_cdf(double alpha, int ell, double x, const ExtractionOptions& opt) {
  if (ell < 1) throw ValidationError("ell must be >= 1");
  int N = 32;
  while (N < 2 * ell) N *= 2;
  const auto dist = count_distribution(alpha, x, N, opt);
  double acc = 0.0;
  for (int j = 0; j < ell; ++j) acc += dist.p_raw[j];
  int clamped = 0;
  return clamp_prob(acc, clamped);
}

JointTailResult joint_tail(double alpha, const std::vector<int>& m, const std::vector<double>& x,
                           const ExtractionOptions& opt) {
  const int k = static_cast<int>(m.size());
  if (k < 1 || k > 3) throw ValidationError("joint_tail supports 1 to 3 indices");
  if (x.size() != m.size()) throw ValidationError("m and x must have equal length");
  if (!(alpha > -1.0)) throw ValidationError("alpha must be > -1");
  for (int i = 0; i < k; ++i) {
    if (m[i] < 1 || (i > 0 && m[i] <= m[i - 1])) throw ValidationError("m must be positive and strictly increasing");
    if (!(x[i] > (i > 0 ? x[i - 1] : 0.0))) throw ValidationError("x must be positive and strictly increasing");
  }

  JointTailResult out;
  int N = 16;
  while (N < 2 * m.back()) N *= 2;
  out.N = N;
  BesselKernel kernel(BesselKernelSpec{alpha});
  out.m_final = extraction_m(kernel, x);
  const auto op = discretize(x, kernel, out.m_final);

  std::size_t total = 1;
  for (int i = 0; i < k; ++i) total *= N;
  auto unpack = [&](std::size_t flat, std::vector<int>& idx) {
    for (int i = k - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(flat % N);
      flat /= N;
    }
  };

  std::vector<cplx> grid(total);
  parallel_for(total, resolve_jobs(opt.jobs), [&](std::size_t flat) {
    std::vector<int> idx(k);
    unpack(flat, idx);
    std::vector<cplx> s(k);
    for (int i = 0; i < k; ++i) s[i] = root_of_unity(idx[i], N);
    grid[flat] = fredholm_det(op, s).value;
  });

  // Inverse DFT one axis at a time.
  std::size_t stride = 1;
  for (int axis = k - 1; axis >= 0; --axis) {
    std::vector<cplx> line(N), res(N);
    for (std::size_t base = 0; base < total; ++base) {
      if ((base / stride) % N != 0) continue;
      for (int a = 0; a < N; ++a) line[a] = grid[base + a * stride];
      for (int j = 0; j < N; ++j) {
        cplx acc = 0.0;
        for (int a = 0; a < N; ++a) acc += line[a] * root_of_unity(-((a * j) % N), N);
        res[j] = acc / static_cast<double>(N);
      }
      for (int j = 0; j < N; ++j) grid[base + j * stride] = res[j];
    }
    stride *= N;
  }

  out.axis_tail.assign(k, 0.0);
  double acc = 0.0;
  std::vector<int> idx(k);
  for (std::size_t flat = 0; flat < total; ++flat) {
    unpack(flat, idx);
    const double p = grid[flat].real();
    for (int i = 0; i < k; ++i)
      if (idx[i] == N - 1) out.axis_tail[i] += std::fabs(p);
    int partial = 0;
    bool keep = true;
    for (int i = 0; i < k && keep; ++i) {
      partial += idx[i];
      keep = partial < m[i];
    }
    if (keep) acc += p;
  }
  for (int i = 0; i < k; ++i) {
    if (out.axis_tail[i] > opt.tol) {
      std::ostringstream os;
      os << "joint_tail: tail mass " << out.axis_tail[i] << " on axis " << i + 1 << " exceeds tol " << opt.tol
         << "; increase N (currently " << N << ")";
      throw NumericalFailure(os.str());
    }
  }
  int clamped = 0;
  out.value = clamp_prob(acc, clamped);
  return out;
}

ParameterSet gap_parameters(double alpha, const std::vector<std::pair<double, double>>& intervals) {
  if (intervals.empty()) throw ValidationError("at least one interval is required");
  ParameterSet p;
  p.alpha = alpha;
  p.x = 1.0;
  double prev = -1.0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto [a, b] = intervals[i];
    if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0)
      throw ValidationError("interval endpoints must be finite and >= 0");
    if (!(b > a)) throw ValidationError("each interval needs a < b");
    if (!(a > prev))
      throw ValidationError("intervals must be disjoint, increasing and not share endpoints");
    prev = b;
    if (a > 0.0) {
      p.r.push_back(a);
      p.s.push_back(1.0);
    }
    p.r.push_back(b);
    p.s.push_back(0.0);
  }
  return p;
}

RouteResult gap_probability(double alpha, const std::vector<std::pair<double, double>>& intervals,
                            const RouteOptions& opt) {
  return two_routes(gap_parameters(alpha, intervals), opt);
}

RouteResult thinned_smallest_cdf(double alpha, double s_thin, double x, const RouteOptions& opt) {
  if (!(s_thin >= 0.0 && s_thin < 1.0)) throw ValidationError("s_thin must lie in [0, 1)");
  return two_routes(ParameterSet{alpha, {1.0}, {s_thin}, x}, opt);
}

ConditionalResult conditional_smallest(double alpha, double s_thin, double x1, double x2, const RouteOptions& opt) {
  if (!(s_thin > 0.0 && s_thin < 1.0)) throw ValidationError("s_thin must lie in (0, 1)");
  if (!(x1 > 0.0 && x2 > x1)) throw ValidationError("need 0 < x1 < x2");
  const ParameterSet num{alpha, {x1, x2}, {0.0, s_thin}, 1.0};
  const ParameterSet den{alpha, {x2}, {s_thin}, 1.0};
  num.validate();
  den.validate();

  ConditionalResult out;
  const auto fn = generating_fn(num, opt.genfn);
  const auto fd = generating_fn(den, opt.genfn);
  if (fn.value() <= 0.0 || fd.value() <= 0.0)
    throw NumericalFailure("conditional_smallest: non-positive determinant");
  out.log_fredholm = fn.det.log_abs - fd.det.log_abs;
  out.fredholm = std::exp(out.log_fredholm);
  if (!opt.painleve_route) return out;
  try {
    out.log_painleve = genfn_painleve(num, opt.painleve).log_value - genfn_painleve(den, opt.painleve).log_value;
    out.painleve = std::exp(out.log_painleve);
    out.discrepancy = std::fabs(out.fredholm - out.painleve);
    out.painleve_ok = true;
  } catch (const NumericalFailure& e) {
    out.painleve_message = e.what();
    out.painleve = out.log_painleve = out.discrepancy = std::nan("");
  }
  return out;
}

std::vector<double> sample_scaled_smallest(int n, double alpha, int draws, std::uint64_t seed0, int jobs) {
  if (n < 1 || draws < 1) throw ValidationError("n and draws must be >= 1");
  std::vector<double> out(draws);
  parallel_for(draws, resolve_jobs(jobs), [&](std::size_t i) {
    out[i] = 4.0 * n * sample_spectrum(n, alpha, seed0 + i).front();
  });
  return out;
}

double ks_smallest(double alpha, std::vector<double> samples) {
  if (samples.empty()) throw ValidationError("no samples");
  std::sort(samples.begin(), samples.end());
  BesselKernel kernel(BesselKernelSpec{alpha});
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double x = samples[i];
    if (!(x > 0.0)) throw ValidationError("samples must be positive");
    const double cdf = 1.0 - generating_fn(kernel, {x}, {cplx(0.0)}, {24, 1e-12, 5}).value();
    d = std::max({d, std::fabs((i + 1) / n - cdf), std::fabs(i / n - cdf)});
  }
  return d;
}

namespace {

ParameterSet remove_component(const ParameterSet& p, int jz) {
  ParameterSet q = p;
  q.r.erase(q.r.begin() + jz);
  q.s.erase(q.s.begin() + jz);
  return q;
}

std::vector<double> q2_at(const ParameterSet& p, const PainleveOptions& opt) {
  const auto traj = integrate(p, p.x, opt);
  std::vector<double> out(p.k());
  for (int l = 0; l < p.k(); ++l) out[l] = traj.q2(l, p.x);
  return out;
}

}  // namespace

DegenerateKind parse_degenerate_kind(const std::string& name) {
  if (name == "s-merge") return DegenerateKind::SMerge;
  if (name == "r-merge") return DegenerateKind::RMerge;
  if (name == "r1-to-0") return DegenerateKind::R1ToZero;
  throw ValidationError("unknown probe kind '" + name + "' (expected s-merge, r-merge or r1-to-0)");
}

std::string to_string(DegenerateKind kind) {
  switch (kind) {
    case DegenerateKind::SMerge: return "s-merge";
    case DegenerateKind::RMerge: return "r-merge";
    case DegenerateKind::R1ToZero: return "r1-to-0";
  }
  return "?";
}

DegenerateProbe degenerate_probe(DegenerateKind kind, const ParameterSet& base, int j,
                                 const std::vector<double>& deltas, const PainleveOptions& opt) {
  const int k = base.k();
  if (kind == DegenerateKind::R1ToZero) j = 1;
  if (k < 1 || static_cast<int>(base.s.size()) != k) throw ValidationError("base needs equal-length r and s");
  if (j < 1 || j > k) throw ValidationError("j must lie in 1..k");
  if (kind == DegenerateKind::RMerge && j < 2) throw ValidationError("r-merge needs j >= 2");
  if (deltas.empty()) throw ValidationError("at least one delta is required");
  for (double d : deltas)
    if (!(d > 0.0)) throw ValidationError("deltas must be positive");

  const int jz = j - 1;
  auto s_at = [&](int idx) { return idx < k ? base.s[idx] : 1.0; };

  DegenerateProbe out;
  out.kind = kind;
  out.j = j;
  out.base = base;
  out.reduced = remove_component(base, jz);
  if (out.reduced.k() > 0) out.reduced_q2 = q2_at(out.reduced, opt);

  double c_prev = 0.0, c_next = 0.0;
  if (kind == DegenerateKind::RMerge) {
    const double span = s_at(jz + 1) - s_at(jz - 1);
    if (span == 0.0) throw ValidationError("r-merge needs s_{j+1} != s_{j-1}");
    c_prev = (s_at(jz) - s_at(jz - 1)) / span;
    c_next = (s_at(jz + 1) - s_at(jz)) / span;
  }

  for (double d : deltas) {
    DegenerateRow row;
    row.delta = d;
    ParameterSet p = base;
    switch (kind) {
      case DegenerateKind::SMerge: p.s[jz] = s_at(jz + 1) + d; break;
      case DegenerateKind::RMerge: p.r[jz] = p.r[jz - 1] + d; break;
      case DegenerateKind::R1ToZero: p.r[0] = d; break;
    }
    row.reference.assign(k, 0.0);
    for (int l = 0; l < k; ++l) {
      if (kind == DegenerateKind::RMerge) {
        if (l == jz - 1) row.reference[l] = c_prev * out.reduced_q2[jz - 1];
        else if (l == jz) row.reference[l] = c_next * out.reduced_q2[jz - 1];
        else row.reference[l] = out.reduced_q2[l < jz ? l : l - 1];
      } else {
        if (l == jz) row.reference[l] = 0.0;
        else row.reference[l] = out.reduced_q2[l < jz ? l : l - 1];
      }
    }
    try {
      p.validate();
      row.q2 = q2_at(p, opt);
      row.ok = true;
    } catch (const std::exception& e) {
      row.message = e.what();
      out.rows.push_back(row);
      continue;
    }
    for (int l = 0; l < k; ++l) {
      const double dev = std::fabs(row.q2[l] - row.reference[l]);
      const bool probed = kind == DegenerateKind::RMerge ? (l == jz - 1 || l == jz) : l == jz;
      if (probed) {
        row.probe = std::max(row.probe, dev);
        if (kind == DegenerateKind::RMerge && row.reference[l] != 0.0)
          row.split_error = std::max(row.split_error, dev / std::fabs(row.reference[l]));
      } else {
        row.others = std::max(row.others, dev);
      }
    }
    out.rows.push_back(row);
  }

  const DegenerateRow* prev = nullptr;
  for (const auto& row : out.rows) {
    if (!row.ok || !(row.probe > 0.0)) continue;
    if (prev) out.slopes.push_back(std::log(row.probe / prev->probe) / std::log(row.delta / prev->delta));
    prev = &row;
  }
  return out;
}

}  // namespace besselgap

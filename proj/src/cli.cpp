#include "besselgap/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "besselgap/apps.hpp"
#include "besselgap/error.hpp"
#include "besselgap/fredholm.hpp"
#include "besselgap/kernels.hpp"
#include "besselgap/lue.hpp"
#include "besselgap/painleve.hpp"

namespace besselgap::cli {

namespace {

using json = nlohmann::ordered_json;

const char* const kUsage =
    "usage: besselgap <command> [options]\n"
    "commands:\n"
    "  genfn             F(r x, s) by the determinant and the coupled system\n"
    "  gap               probability of no particle in a union of intervals\n"
    "  count-dist        P(n_(0,x) = m), m < N\n"
    "  kth-cdf           P(zeta_ell > x)\n"
    "  joint             P(zeta_m1 > x1, zeta_m2 > x2, ...)\n"
    "  thinned           P(xi_1 > x) after thinning with s\n"
    "  conditional       P(zeta_1 > x1 | xi_1 > x2)\n"
    "  ratio-q           P(zeta_2 > r zeta_1) by two routes\n"
    "  lue-converge      finite-n deviation at the hard edge\n"
    "  hankel-check      finite-n determinant against the Hankel ratio\n"
    "  sample-lue        scaled smallest eigenvalues and KS distance\n"
    "  degenerate-probe  q_j^2 near degenerate configurations\n"
    "  trace-q           q_j^2(xi) curves\n"
    "  selfcheck         invariant suite\n"
    "run 'besselgap <command> --help' for options\n";

const std::vector<std::string> kCommands = {"genfn",      "gap",          "count-dist",   "kth-cdf",    "joint",
                                            "thinned",    "conditional",  "ratio-q",      "lue-converge",
                                            "hankel-check", "sample-lue", "degenerate-probe", "trace-q",
                                            "selfcheck"};

// ---- parsing helpers ----

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ValidationError(what + ": cannot parse '" + text + "' as a number");
  }
  if (used != text.size()) throw ValidationError(what + ": trailing characters in '" + text + "'");
  return v;
}

long long parse_int(const std::string& text, const std::string& what) {
  const double v = parse_double(text, what);
  if (v != std::floor(v)) throw ValidationError(what + ": '" + text + "' is not an integer");
  return static_cast<long long>(v);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_double(part, what));
  if (out.empty()) throw ValidationError(what + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (const auto& part : split(text, ',')) out.push_back(static_cast<int>(parse_int(part, what)));
  if (out.empty()) throw ValidationError(what + ": empty list");
  return out;
}

std::vector<std::pair<double, double>> parse_intervals(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  for (const auto& part : split(text, ',')) {
    const auto ab = split(part, ':');
    if (ab.size() != 2) throw ValidationError("intervals: expected a:b, got '" + part + "'");
    out.emplace_back(parse_double(ab[0], "intervals"), parse_double(ab[1], "intervals"));
  }
  return out;
}

// JSON config values become the same text a flag would carry.
std::string json_to_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      if (v[i].is_array()) {
        if (v[i].size() != 2) throw ValidationError("config: interval entries need two numbers");
        out += json_to_text(v[i][0]) + ":" + json_to_text(v[i][1]);
      } else {
        out += json_to_text(v[i]);
      }
    }
    return out;
  }
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw ValidationError("config: unsupported value " + v.dump());
}

// ---- output ----

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  json diagnostics = json::object();
};

std::string csv_cell(const json& v) {
  if (v.is_number_float()) return fmt(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_null()) return "nan";
  std::string s = v.get<std::string>();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return s;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["alpha"] = c.alpha;
  j["r"] = c.r;
  j["s"] = c.s;
  j["x"] = c.x;
  json iv = json::array();
  for (const auto& [a, b] : c.intervals) iv.push_back({a, b});
  j["intervals"] = iv;
  j["m"] = c.m;
  j["ell"] = c.ell;
  j["s-thin"] = c.s_thin;
  j["x1"] = c.x1;
  j["x2"] = c.x2;
  j["n"] = c.n;
  j["N"] = c.N;
  j["draws"] = c.draws;
  j["seed"] = c.seed;
  j["probe"] = c.probe;
  j["j"] = c.j;
  j["deltas"] = c.deltas;
  j["quad-tol"] = c.quad_tol;
  j["ode-tol"] = c.ode_tol;
  j["eps"] = c.eps;
  j["format"] = c.format;
  j["jobs"] = resolve_jobs(c.jobs);
  return j;
}

void emit(const RunConfig& cfg, Table& t, std::ostream& out) {
  json diag;
  for (const char* key : {"m_final", "eps", "route_discrepancy"})
    diag[key] = t.diagnostics.contains(key) ? t.diagnostics[key] : json(nullptr);
  for (const auto& [key, v] : t.diagnostics.items())
    if (!diag.contains(key)) diag[key] = v;
  t.diagnostics = diag;
  if (cfg.format == "json") {
    json doc;
    doc["config"] = config_json(cfg);
    json rows = json::array();
    for (const auto& r : t.rows) {
      json o;
      for (std::size_t i = 0; i < t.columns.size(); ++i) {
        const json& v = r[i];
        o[t.columns[i]] = v.is_number_float() ? number(v.get<double>()) : v;
      }
      rows.push_back(o);
    }
    doc["rows"] = rows;
    doc["diagnostics"] = t.diagnostics;
    out << doc.dump(2) << '\n';
    return;
  }
  out << "# config: " << config_json(cfg).dump() << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_cell(r[i]);
    out << '\n';
  }
  out << "# diagnostics: " << t.diagnostics.dump() << '\n';
}

// ---- commands ----

GenFnOptions genfn_opts(const RunConfig& c) { return {24, c.quad_tol, 4}; }

PainleveOptions pv_opts(const RunConfig& c) {
  PainleveOptions o;
  o.eps = c.eps;
  o.tol = c.ode_tol;
  return o;
}

RouteOptions route_opts(const RunConfig& c) {
  RouteOptions o;
  o.genfn = genfn_opts(c);
  o.painleve = pv_opts(c);
  return o;
}

ParameterSet base_params(const RunConfig& c, double x) {
  ParameterSet p{c.alpha, c.r, c.s, x};
  p.validate();
  return p;
}

void require_x(const RunConfig& c) {
  if (c.x.empty()) throw ValidationError("x: at least one value is required");
}

struct Failures {
  json list = json::array();
  void add(double where, const std::string& msg) { list.push_back({{"x", where}, {"message", msg}}); }
};

Table cmd_genfn(const RunConfig& c) {
  require_x(c);
  for (double x : c.x) base_params(c, x);
  Table t;
  t.columns = {"x", "F_fredholm", "F_painleve", "abs_diff", "m_final"};
  t.rows.resize(c.x.size());
  std::vector<std::string> fail(c.x.size());
  std::vector<double> eps(c.x.size());
  parallel_for(c.x.size(), resolve_jobs(c.jobs), [&](std::size_t i) {
    const auto p = base_params(c, c.x[i]);
    const auto f = generating_fn(p, genfn_opts(c));
    double pv = std::nan("");
    eps[i] = c.eps > 0.0 ? c.eps : default_eps(p);
    try {
      pv = genfn_painleve(p, pv_opts(c)).value;
    } catch (const NumericalFailure& e) {
      fail[i] = e.what();
    }
    t.rows[i] = {c.x[i], f.value(), pv, std::fabs(f.value() - pv), f.m_final};
  });
  int m_final = 0;
  double worst = 0.0;
  Failures failures;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    m_final = std::max(m_final, t.rows[i][4].get<int>());
    const double d = t.rows[i][3].get<double>();
    if (std::isfinite(d)) worst = std::max(worst, d);
    if (!fail[i].empty()) failures.add(c.x[i], fail[i]);
  }
  t.diagnostics["m_final"] = m_final;
  t.diagnostics["eps"] = eps.front();
  t.diagnostics["route_discrepancy"] = worst;
  if (!failures.list.empty()) t.diagnostics["painleve_failures"] = failures.list;
  return t;
}

void route_diagnostics(Table& t, const RouteResult& r) {
  t.diagnostics["m_final"] = r.m_final;
  t.diagnostics["eps"] = r.eps;
  t.diagnostics["route_discrepancy"] = number(r.discrepancy);
  t.diagnostics["clamped"] = r.clamped;
  if (!r.painleve_ok) t.diagnostics["painleve_failure"] = r.painleve_message;
}

Table cmd_gap(const RunConfig& c) {
  if (c.intervals.empty()) throw ValidationError("gap: --intervals a:b[,c:d...] is required");
  const auto r = gap_probability(c.alpha, c.intervals, route_opts(c));
  Table t;
  t.columns = {"fredholm", "painleve", "abs_diff"};
  t.rows.push_back({r.fredholm, r.painleve, r.discrepancy});
  route_diagnostics(t, r);
  return t;
}

Table cmd_count_dist(const RunConfig& c) {
  require_x(c);
  Table t;
  t.columns = {"x", "m", "p", "p_raw"};
  json per = json::array();
  int m_final = 0;
  for (double x : c.x) {
    const auto d = count_distribution(c.alpha, x, c.N, {1e-10, c.jobs});
    for (int m = 0; m < d.N; ++m) t.rows.push_back({x, m, d.p[m], d.p_raw[m]});
    m_final = std::max(m_final, d.m_final);
    per.push_back({{"x", x},
                   {"total", d.total()},
                   {"mean", d.mean()},
                   {"expected_count", expected_count(c.alpha, x)},
                   {"tail", d.tail},
                   {"clamped", d.clamped}});
  }
  t.diagnostics["m_final"] = m_final;
  t.diagnostics["per_x"] = per;
  return t;
}

Table cmd_kth_cdf(const RunConfig& c) {
  require_x(c);
  Table t;
  t.columns = {"x", "ell", "prob"};
  t.rows.resize(c.x.size());
  for (std::size_t i = 0; i < c.x.size(); ++i)
    t.rows[i] = {c.x[i], c.ell, kth_smallest_cdf(c.alpha, c.ell, c.x[i], {1e-10, c.jobs})};
  return t;
}

Table cmd_joint(const RunConfig& c) {
  const auto r = joint_tail(c.alpha, c.m, c.x, {1e-10, c.jobs});
  Table t;
  t.columns = {"prob", "N"};
  t.rows.push_back({r.value, r.N});
  t.diagnostics["m_final"] = r.m_final;
  t.diagnostics["axis_tail"] = r.axis_tail;
  return t;
}

Table cmd_thinned(const RunConfig& c) {
  require_x(c);
  Table t;
  t.columns = {"x", "fredholm", "painleve", "abs_diff"};
  std::vector<RouteResult> res(c.x.size());
  parallel_for(c.x.size(), resolve_jobs(c.jobs),
               [&](std::size_t i) { res[i] = thinned_smallest_cdf(c.alpha, c.s_thin, c.x[i], route_opts(c)); });
  double worst = 0.0;
  int m_final = 0;
  Failures failures;
  for (std::size_t i = 0; i < res.size(); ++i) {
    t.rows.push_back({c.x[i], res[i].fredholm, res[i].painleve, res[i].discrepancy});
    if (std::isfinite(res[i].discrepancy)) worst = std::max(worst, res[i].discrepancy);
    m_final = std::max(m_final, res[i].m_final);
    if (!res[i].painleve_ok) failures.add(c.x[i], res[i].painleve_message);
  }
  t.diagnostics["m_final"] = m_final;
  t.diagnostics["eps"] = res.front().eps;
  t.diagnostics["route_discrepancy"] = worst;
  if (!failures.list.empty()) t.diagnostics["painleve_failures"] = failures.list;
  return t;
}

Table cmd_conditional(const RunConfig& c) {
  const auto r = conditional_smallest(c.alpha, c.s_thin, c.x1, c.x2, route_opts(c));
  Table t;
  t.columns = {"x1", "x2", "s_thin", "fredholm", "painleve", "log_fredholm", "log_painleve", "abs_diff"};
  t.rows.push_back({c.x1, c.x2, c.s_thin, r.fredholm, r.painleve, r.log_fredholm, r.log_painleve, r.discrepancy});
  t.diagnostics["route_discrepancy"] = number(r.discrepancy);
  if (!r.painleve_ok) t.diagnostics["painleve_failure"] = r.painleve_message;
  return t;
}

Table cmd_ratio_q(const RunConfig& c) {
  Table t;
  t.columns = {"r", "q_tilde", "q_fredholm", "abs_diff", "tilde_completed"};
  std::vector<RatioQResult> res(c.r.size());
  parallel_for(c.r.size(), resolve_jobs(c.jobs), [&](std::size_t i) { res[i] = ratio_Q(c.alpha, c.r[i]); });
  double worst = 0.0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    t.rows.push_back({c.r[i], res[i].q_tilde, res[i].q_fredholm, res[i].discrepancy, res[i].tilde_completed});
    worst = std::max(worst, res[i].discrepancy);
  }
  t.diagnostics["route_discrepancy"] = worst;
  return t;
}

Table cmd_lue_converge(const RunConfig& c) {
  require_x(c);
  const auto p = base_params(c, c.x.front());
  const auto bessel = generating_fn(p, genfn_opts(c));
  Table t;
  t.columns = {"n", "F_lue", "F_bessel", "abs_diff"};
  std::vector<double> vals(c.n.size());
  parallel_for(c.n.size(), resolve_jobs(c.jobs), [&](std::size_t i) {
    const int n = c.n[i];
    if (n < 1) throw ValidationError("n must be >= 1");
    std::vector<double> lam;
    for (double e : p.endpoints()) lam.push_back(e / (4.0 * n));
    vals[i] = lue_genfn(LueModel::make(n, c.alpha), lam, c.s).value();
  });
  for (std::size_t i = 0; i < vals.size(); ++i)
    t.rows.push_back({c.n[i], vals[i], bessel.value(), std::fabs(vals[i] - bessel.value())});
  t.diagnostics["m_final"] = bessel.m_final;
  return t;
}

Table cmd_hankel_check(const RunConfig& c) {
  require_x(c);
  const auto p = base_params(c, c.x.front());
  Table t;
  t.columns = {"n", "F_lue", "hankel", "rel_diff", "condition"};
  for (int n : c.n) {
    if (n < 1) throw ValidationError("n must be >= 1");
    const auto lam = p.endpoints();
    const double f = lue_genfn(LueModel::make(n, c.alpha), lam, c.s).value();
    const auto h = hankel_ratio(n, c.alpha, lam, c.s);
    t.rows.push_back({n, f, h.value, std::fabs(f - h.value) / std::fabs(h.value), h.condition});
  }
  return t;
}

Table cmd_sample_lue(const RunConfig& c) {
  const int n = c.n.front();
  const auto xs = sample_scaled_smallest(n, c.alpha, c.draws, c.seed, c.jobs);
  Table t;
  t.columns = {"draw", "seed", "scaled_min"};
  double mean = 0.0;
  for (int i = 0; i < c.draws; ++i) {
    t.rows.push_back({i, c.seed + static_cast<std::uint64_t>(i), xs[i]});
    mean += xs[i] / c.draws;
  }
  t.diagnostics["n"] = n;
  t.diagnostics["mean"] = mean;
  t.diagnostics["ks_distance"] = ks_smallest(c.alpha, xs);
  return t;
}

Table cmd_degenerate_probe(const RunConfig& c) {
  require_x(c);
  const ParameterSet base{c.alpha, c.r, c.s, c.x.front()};
  const auto pr = degenerate_probe(parse_degenerate_kind(c.probe), base, c.j, c.deltas, pv_opts(c));
  Table t;
  t.columns = {"delta", "ok", "probe", "others", "split_error"};
  const int k = base.k();
  for (int l = 1; l <= k; ++l) t.columns.push_back("q2_" + std::to_string(l));
  for (int l = 1; l <= k; ++l) t.columns.push_back("ref_" + std::to_string(l));
  json messages = json::array();
  for (const auto& row : pr.rows) {
    std::vector<json> r = {row.delta, row.ok, row.probe, row.others, row.split_error};
    for (int l = 0; l < k; ++l) r.push_back(row.ok ? row.q2[l] : std::nan(""));
    for (int l = 0; l < k; ++l) r.push_back(row.reference[l]);
    t.rows.push_back(r);
    if (!row.ok) messages.push_back({{"delta", row.delta}, {"message", row.message}});
  }
  t.diagnostics["eps"] = c.eps;
  t.diagnostics["slopes"] = pr.slopes;
  t.diagnostics["reduced_q2"] = pr.reduced_q2;
  if (!messages.empty()) t.diagnostics["failures"] = messages;
  return t;
}

Table cmd_trace_q(const RunConfig& c) {
  require_x(c);
  const double xi_max = *std::max_element(c.x.begin(), c.x.end());
  const auto p = base_params(c, xi_max);
  const auto traj = integrate(p, xi_max, pv_opts(c));
  Table t;
  t.columns = {"xi"};
  for (int l = 1; l <= p.k(); ++l) t.columns.push_back("q2_" + std::to_string(l));
  t.columns.push_back("S");
  for (double xi : c.x) {
    if (!(xi > 0.0)) throw ValidationError("trace-q: xi values must be > 0");
    const auto st = xi < traj.eps() ? seed_corrected(p, xi) : traj.state_at(xi);
    std::vector<json> r = {xi};
    for (int l = 0; l < p.k(); ++l) r.push_back(st.q2(l));
    r.push_back(st.S());
    t.rows.push_back(r);
  }
  t.diagnostics["eps"] = traj.eps();
  t.diagnostics["steps"] = traj.steps();
  return t;
}

struct Check {
  std::string name;
  double value;
  double tolerance;
};

Table cmd_selfcheck(const RunConfig& c, bool& all_pass) {
  std::vector<Check> checks;
  auto guarded = [&](const std::string& name, double tol, const std::function<double()>& f) {
    double v;
    try {
      v = f();
    } catch (const std::exception&) {
      v = std::nan("");
    }
    checks.push_back({name, v, tol});
  };
  const double a = c.alpha;
  guarded("count_normalization", 1e-8, [&] { return std::fabs(count_distribution(a, 5.0, 32).total() - 1.0); });
  guarded("count_mean_vs_kernel_trace", 1e-6,
          [&] { return std::fabs(count_distribution(a, 5.0, 32).mean() - expected_count(a, 5.0)); });
  guarded("count_p0_vs_gap", 1e-9, [&] {
    return std::fabs(count_distribution(a, 2.0, 16).p[0] - generating_fn(ParameterSet{a, {2.0}, {0.0}, 1.0}).value());
  });
  for (const auto& [r, s] : std::vector<std::pair<std::vector<double>, std::vector<double>>>{
           {{1.0}, {0.0}}, {{1.0, 2.0}, {0.3, 0.7}}, {{0.5, 1.5, 3.0}, {0.8, 0.1, 0.5}}}) {
    const ParameterSet p{a, r, s, 1.0};
    guarded("route_agreement_k" + std::to_string(p.k()), 1e-6, [&] {
      return std::fabs(generating_fn(p).value() - genfn_painleve(p, pv_opts(c)).value);
    });
  }
  guarded("gap_union_routes", 1e-6, [&] { return gap_probability(a, {{1.0, 2.0}, {3.0, 4.0}}).discrepancy; });
  guarded("bform_residual", 1e-6, [&] {
    const auto traj = integrate(ParameterSet{a, {1.0, 2.0}, {0.3, 0.7}, 4.0}, 4.0);
    return bform(traj, std::sqrt(0.1)).max_residual;
  });
  guarded("hankel_vs_fredholm_n6", 1e-8, [&] {
    const std::vector<double> lam{0.5, 2.0}, s{0.2, 0.6};
    const double h = hankel_ratio(6, a, lam, s).value;
    return std::fabs(lue_genfn(LueModel::make(6, a), lam, s).value() - h) / std::fabs(h);
  });
  guarded("validation_rejects_equal_s", 0.5, [&] {
    try {
      ParameterSet{a, {1.0, 2.0}, {1.0, 1.0}, 1.0}.validate();
    } catch (const ValidationError&) {
      return 0.0;
    }
    return 1.0;
  });

  Table t;
  t.columns = {"check", "value", "tolerance", "pass"};
  all_pass = true;
  for (const auto& ch : checks) {
    const bool pass = std::isfinite(ch.value) && ch.value <= ch.tolerance;
    all_pass = all_pass && pass;
    t.rows.push_back({ch.name, ch.value, ch.tolerance, pass});
  }
  t.diagnostics["all_pass"] = all_pass;
  return t;
}

// ---- option resolution ----

struct Raw {
  std::map<std::string, std::string> flags;  // given on the command line
  json file = json::object();

  bool has(const std::string& key) const { return flags.count(key) || file.contains(key); }
  std::string text(const std::string& key) const {
    if (auto it = flags.find(key); it != flags.end()) return it->second;
    return json_to_text(file.at(key));
  }
};

RunConfig resolve(const std::string& command, const Raw& raw) {
  RunConfig c;
  c.command = command;
  auto dbl = [&](const char* key, double& dst) {
    if (raw.has(key)) dst = parse_double(raw.text(key), key);
  };
  auto integer = [&](const char* key, int& dst) {
    if (raw.has(key)) dst = static_cast<int>(parse_int(raw.text(key), key));
  };
  auto list = [&](const char* key, std::vector<double>& dst) {
    if (raw.has(key)) dst = parse_list(raw.text(key), key);
  };
  dbl("alpha", c.alpha);
  list("r", c.r);
  list("s", c.s);
  if (raw.has("x")) c.x = parse_grid(raw.text("x"));
  if (raw.has("intervals")) c.intervals = parse_intervals(raw.text("intervals"));
  if (raw.has("m")) c.m = parse_int_list(raw.text("m"), "m");
  integer("ell", c.ell);
  dbl("s-thin", c.s_thin);
  dbl("x1", c.x1);
  dbl("x2", c.x2);
  if (raw.has("n")) c.n = parse_int_list(raw.text("n"), "n");
  integer("N", c.N);
  integer("draws", c.draws);
  if (raw.has("seed")) {
    const long long v = parse_int(raw.text("seed"), "seed");
    if (v < 0) throw ValidationError("seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(v);
  }
  if (raw.has("probe")) c.probe = raw.text("probe");
  integer("j", c.j);
  list("deltas", c.deltas);
  dbl("quad-tol", c.quad_tol);
  dbl("ode-tol", c.ode_tol);
  dbl("eps", c.eps);
  if (raw.has("format")) c.format = raw.text("format");
  integer("jobs", c.jobs);

  if (c.format != "csv" && c.format != "json") throw ValidationError("format must be csv or json");
  if (!(c.quad_tol > 0.0) || !(c.ode_tol > 0.0)) throw ValidationError("tolerances must be > 0");
  if (c.eps < 0.0) throw ValidationError("eps must be >= 0 (0 selects the default)");
  if (c.draws < 1) throw ValidationError("draws must be >= 1");
  if (c.n.empty()) throw ValidationError("n: at least one value is required");
  return c;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() == 3) {
    const double a = parse_double(parts[0], "grid start"), b = parse_double(parts[1], "grid stop");
    const long long n = parse_int(parts[2], "grid count");
    if (n < 1) throw ValidationError("grid count must be >= 1");
    std::vector<double> out(n);
    for (long long i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1);
    return out;
  }
  if (parts.size() != 1) throw ValidationError("grid: expected a list or start:stop:count, got '" + text + "'");
  return parse_list(text, "x");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (argc < 2) {
    err << kUsage;
    return kUnknownCommand;
  }
  const std::string command = argv[1];
  if (command == "--help" || command == "-h") {
    out << kUsage;
    return kOk;
  }
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
    err << "unknown command '" << command << "'\n" << kUsage;
    return kUnknownCommand;
  }

  CLI::App app{"besselgap " + command};
  app.name("besselgap " + command);
  Raw raw;
  std::map<std::string, std::string> values;
  const std::vector<std::pair<std::string, std::string>> opts = {
      {"alpha", "Bessel parameter, > -1"},
      {"r", "interval endpoints r_1 < ... < r_k (comma list; ratios for ratio-q)"},
      {"s", "multipliers s_1..s_k (comma list)"},
      {"x", "x value, comma list or start:stop:count (xi grid for trace-q)"},
      {"intervals", "gap intervals a:b,c:d,..."},
      {"m", "particle indices for joint (comma list)"},
      {"ell", "particle index for kth-cdf"},
      {"s-thin", "thinning parameter"},
      {"x1", "conditional: constrained point"},
      {"x2", "conditional: thinned point"},
      {"n", "matrix sizes (comma list)"},
      {"N", "extraction size, power of two >= 8"},
      {"draws", "Monte Carlo draws"},
      {"seed", "first seed"},
      {"probe", "s-merge, r-merge or r1-to-0"},
      {"j", "probe component (one-based)"},
      {"deltas", "probe distances (comma list)"},
      {"quad-tol", "determinant convergence tolerance"},
      {"ode-tol", "integrator tolerance"},
      {"eps", "seed point of the coupled system (0 = default)"},
      {"format", "csv or json"},
      {"jobs", "worker threads (default BESSELGAP_JOBS or 1)"},
  };
  for (const auto& [name, help] : opts) app.add_option("--" + name, values[name], help);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with the same keys as the flags");

  std::vector<const char*> args;
  args.push_back(argv[0]);
  for (int i = 2; i < argc; ++i) args.push_back(argv[i]);
  try {
    app.parse(static_cast<int>(args.size()), args.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return kValidation;
  }

  try {
    for (const auto& [name, help] : opts)
      if (app.count("--" + name)) raw.flags[name] = values[name];
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ValidationError("cannot open config file '" + config_path + "'");
      try {
        raw.file = json::parse(in);
      } catch (const json::exception& e) {
        throw ValidationError(std::string("config file: ") + e.what());
      }
      if (!raw.file.is_object()) throw ValidationError("config file must hold a JSON object");
      for (const auto& [key, v] : raw.file.items()) {
        const bool known = std::any_of(opts.begin(), opts.end(), [&](const auto& o) { return o.first == key; });
        if (!known && key != "command") throw ValidationError("config file: unknown key '" + key + "'");
      }
    }
    const RunConfig cfg = resolve(command, raw);

    Table t;
    bool ok = true;
    if (command == "genfn") t = cmd_genfn(cfg);
    else if (command == "gap") t = cmd_gap(cfg);
    else if (command == "count-dist") t = cmd_count_dist(cfg);
    else if (command == "kth-cdf") t = cmd_kth_cdf(cfg);
    else if (command == "joint") t = cmd_joint(cfg);
    else if (command == "thinned") t = cmd_thinned(cfg);
    else if (command == "conditional") t = cmd_conditional(cfg);
    else if (command == "ratio-q") t = cmd_ratio_q(cfg);
    else if (command == "lue-converge") t = cmd_lue_converge(cfg);
    else if (command == "hankel-check") t = cmd_hankel_check(cfg);
    else if (command == "sample-lue") t = cmd_sample_lue(cfg);
    else if (command == "degenerate-probe") t = cmd_degenerate_probe(cfg);
    else if (command == "trace-q") t = cmd_trace_q(cfg);
    else t = cmd_selfcheck(cfg, ok);
    emit(cfg, t, out);
    return ok ? kOk : kNumerical;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const DomainError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const StiffnessSignal& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace besselgap::cli

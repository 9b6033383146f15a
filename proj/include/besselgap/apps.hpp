#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "besselgap/fredholm.hpp"
#include "besselgap/painleve.hpp"

namespace besselgap {

/// Worker count: the explicit value when positive, otherwise BESSELGAP_JOBS,
/// otherwise 1.
int resolve_jobs(int jobs);

/// Runs body(i) for i in [0, n) on up to `jobs` threads.  Each index is
/// visited exactly once; the first exception is rethrown after joining.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

/// P(n_(0,x) = m) for m = 0..N-1 by coefficient extraction on |s| = 1.
struct CountDistribution {
  double alpha = 0.0;
  double x = 0.0;
  int N = 0;
  int m_final = 0;
  std::vector<double> p;      // clamped at 0
  std::vector<double> p_raw;  // before clamping
  double tail = 0.0;          // estimate of P(n >= N)
  int clamped = 0;            // entries that were negative beyond roundoff
  double total() const;
  double mean() const;
};

struct ExtractionOptions {
  double tol = 1e-10;  // tail mass allowed before asking for a larger N
  int jobs = 0;
};

CountDistribution count_distribution(double alpha, double x, int N, const ExtractionOptions& opt = {});

/// int_0^x K(u,u) du, the expected number of particles in (0, x).
double expected_count(double alpha, double x);

/// P(zeta_ell > x): fewer than ell particles in (0, x).
double kth_smallest_cdf(double alpha, int ell, double x, const ExtractionOptions& opt = {});

/// P(zeta_{m_1} > x_1, ..., zeta_{m_k} > x_k) for k <= 3, from the joint
/// occupancy distribution of (0,x_1), (x_1,x_2), ... on an N^k grid.
struct JointTailResult {
  double value = 0.0;
  int N = 0;
  int m_final = 0;
  std::vector<double> axis_tail;  // mass at the trailing count N-1 of each axis
};
JointTailResult joint_tail(double alpha, const std::vector<int>& m, const std::vector<double>& x,
                           const ExtractionOptions& opt = {});

/// A probability obtained from the determinant and from the coupled system.
struct RouteResult {
  double fredholm = 0.0;
  double painleve = 0.0;
  double discrepancy = 0.0;
  bool painleve_ok = false;
  std::string painleve_message;
  int m_final = 0;
  double eps = 0.0;
  int clamped = 0;  // values outside [0, 1] beyond 1e-9
  double value() const { return fredholm; }
};

struct RouteOptions {
  GenFnOptions genfn{};
  PainleveOptions painleve{};
  bool painleve_route = true;
};

/// (r, s) with s = (1,0,1,0,...) on the endpoints of disjoint intervals, the
/// leading (0, a) piece folded in when a_1 = 0.
ParameterSet gap_parameters(double alpha, const std::vector<std::pair<double, double>>& intervals);

/// Probability of no particle in the union of the intervals.
RouteResult gap_probability(double alpha, const std::vector<std::pair<double, double>>& intervals,
                            const RouteOptions& opt = {});

/// P(xi_1 > x) after each particle is removed with probability s: F(x, s).
RouteResult thinned_smallest_cdf(double alpha, double s_thin, double x, const RouteOptions& opt = {});

/// P(zeta_1 > x1 | xi_1 > x2) = F((x1,x2),(0,s)) / F(x2, s), evaluated in logs.
struct ConditionalResult {
  double log_fredholm = 0.0;
  double log_painleve = 0.0;
  double fredholm = 0.0;
  double painleve = 0.0;
  double discrepancy = 0.0;
  bool painleve_ok = false;
  std::string painleve_message;
  double value() const { return fredholm; }
};
ConditionalResult conditional_smallest(double alpha, double s_thin, double x1, double x2,
                                       const RouteOptions& opt = {});

/// 4n lambda_min over `draws` LUE(n, alpha) spectra with seeds seed0 + i.
std::vector<double> sample_scaled_smallest(int n, double alpha, int draws, std::uint64_t seed0, int jobs = 0);

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and
/// the hard-edge law P(xi_1 <= x) = 1 - F(x, 0).
double ks_smallest(double alpha, std::vector<double> samples);

enum class DegenerateKind { SMerge, RMerge, R1ToZero };

/// One evaluation of the k-system at a perturbed configuration.
struct DegenerateRow {
  double delta = 0.0;
  bool ok = false;
  std::string message;
  std::vector<double> q2;         // q_l^2(x), l = 1..k
  std::vector<double> reference;  // limit predicted from the reduced system
  double probe = 0.0;             // quantity with the asserted decay rate
  double others = 0.0;            // max |q_l^2 - reference_l| over the remaining l
  double split_error = 0.0;       // r-merge only: max relative error of the split
};

struct DegenerateProbe {
  DegenerateKind kind = DegenerateKind::SMerge;
  int j = 1;  // one-based component index
  ParameterSet base;
  ParameterSet reduced;
  std::vector<double> reduced_q2;
  std::vector<DegenerateRow> rows;
  /// Log-log slopes of probe between consecutive successful rows.
  std::vector<double> slopes;
};

/// Perturbs `base` so that component j is delta away from the degenerate
/// configuration, evaluates q^2 at xi = base.x for each delta, and compares
/// with the reduced (k-1)-system:
///   SMerge:   s_j = s_{j+1} + delta, probe = |q_j^2|
///   RMerge:   r_j = r_{j-1} + delta, probe = max deviation from the split
///   R1ToZero: r_1 = delta (j ignored), probe = |q_1^2|
/// The other entries of base are used as given.
DegenerateProbe degenerate_probe(DegenerateKind kind, const ParameterSet& base, int j,
                                 const std::vector<double>& deltas, const PainleveOptions& opt = {});

DegenerateKind parse_degenerate_kind(const std::string& name);
std::string to_string(DegenerateKind kind);

}  // namespace besselgap

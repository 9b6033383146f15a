#pragma once

#include <cmath>
#include <vector>

#include "besselgap/fredholm.hpp"
#include "besselgap/ode.hpp"

namespace besselgap {

/// One point of the coupled system in the real amplitudes rho_j, where
/// q_j^2 = sigma_j rho_j^2 and sigma_j = sign(s_{j+1} - s_j).  Component 0
/// carries 1 - S = sigma0 rho0^2 (see docs/painleve_formulation.md).
struct PainleveState {
  double xi = 0.0;
  std::vector<double> rho;   // j = 1..k, stored zero-based
  std::vector<double> drho;
  std::vector<int> sigma;
  double rho0 = 0.0;
  double drho0 = 0.0;
  int sigma0 = 1;

  double q2(int j) const { return sigma[j] * rho[j] * rho[j]; }
  double S() const;  // sum_j q_j^2
  double P() const;  // sum_j q_j q_j'
};

/// Leading Bessel seed: rho_j = sqrt|s_{j+1}-s_j| J_alpha(sqrt(r_j eps)),
/// rho_j' by the chain rule; rho0 from 1 - S.
PainleveState seed(const ParameterSet& params, double eps);

/// Seed used by the integrator: the leading form times
/// (1 + kappa eps^{1+alpha}) with the first correction kappa of the
/// small-xi expansion, normalized so that sigma0 rho0^2 + S = 1 and
/// sigma0 rho0 rho0' + P = 0 hold exactly.
PainleveState seed_corrected(const ParameterSet& params, double eps);

/// rho_j'' from the k coupled equations, solved in closed form by the
/// rank-one identity (the matrix acting on q'' is xi^2 (1-S)[(1-S) I + q q^T]).
/// Throws StiffnessSignal when |1 - S| < 1e-10 or xi <= 0.
std::vector<double> accelerations(const PainleveState& st, const ParameterSet& params);

/// LHS - RHS of each of the k coupled equations (divided by sigma_j^{1/2}),
/// together with a scale: the largest magnitude among the terms.
struct SystemResidual {
  std::vector<double> residual;
  std::vector<double> scale;
};
SystemResidual system_residuals(const PainleveState& st, const std::vector<double>& ddrho,
                                const ParameterSet& params);

double default_eps(const ParameterSet& params);

struct PainleveOptions {
  double eps = 0.0;      // 0: default_eps
  double tol = 1e-10;    // relative local error target
  double blowup = 1e6;
};

/// Dense trajectory on [eps, x_max].  The integrator works in t = ln xi on
/// the multiplier form with k+1 components plus the quadrature states
/// A_j = int_0^xi q_j^2 and G_j = int_0^xi log(xi/eta) q_j^2.
class PainleveTrajectory {
 public:
  const ParameterSet& params() const { return params_; }
  double eps() const { return eps_; }
  double x_max() const { return x_max_; }
  int k() const { return params_.k(); }
  const std::vector<int>& sigma() const { return sigma_; }
  int sigma0() const { return sigma0_; }
  const DenseSolution& dense() const { return sol_; }
  int steps() const { return sol_.steps(); }

  /// Step boundaries in xi.
  std::vector<double> grid() const;
  PainleveState state_at(double xi) const;
  /// rho_j'' from the multiplier form at the interpolated state.
  std::vector<double> second_derivatives(double xi) const;
  double q2(int j, double xi) const;
  std::vector<double> mass(double xi) const;        // A_j
  std::vector<double> log_moment(double xi) const;  // G_j

  // raw layout helpers
  int n_comp() const { return k() + 1; }

 private:
  friend PainleveTrajectory integrate(const ParameterSet&, double, const PainleveOptions&);
  ParameterSet params_;
  double eps_ = 0.0;
  double x_max_ = 0.0;
  std::vector<int> sigma_;
  int sigma0_ = 1;
  DenseSolution sol_;
};

/// Throws NumericalFailure on step-floor failure or blow-up (with the last
/// good xi in the message).
PainleveTrajectory integrate(const ParameterSet& params, double x_max, const PainleveOptions& opt = {});

struct GenFnEvaluation {
  double x = 0.0;
  double value = 1.0;
  double log_value = 0.0;
  std::vector<double> log_weight;  // -(r_j/4) int_0^x log(x/xi) q_j^2
  double dlog_dx = 0.0;            // -sum_j (r_j / 4x) int_0^x q_j^2
};

GenFnEvaluation genfn_painleve(const PainleveTrajectory& traj, double x);

/// Convenience: integrate to x and evaluate.
GenFnEvaluation genfn_painleve(const ParameterSet& params, const PainleveOptions& opt = {});

/// Lax-pair scalar identities in the variable y = sqrt(xi):
/// b_j(y) = (y/2) q_j^2(y^2), b_0 = y/2 - sum b_j, u from the alpha-equation,
/// and the residuals of the k j-equations.
struct BFormView {
  std::vector<double> y;
  std::vector<std::vector<double>> b;      // [j][i], j = 0..k
  std::vector<double> u;                   // NaN where b_0 is too small
  std::vector<std::vector<double>> residual;  // [j-1][i], j = 1..k, NaN when unavailable
  std::vector<double> sum_rule;            // (y/2) sigma0 rho0^2 + sum_{j>=1} b_j - y/2
  double max_residual = 0.0;               // over available entries
};

/// Residual entries are unavailable where |b_0| < b0_floor.
BFormView bform(const PainleveTrajectory& traj, const std::vector<double>& y, double b0_floor = 1e-8);

/// Same at the step boundaries with y >= y_min.
BFormView bform(const PainleveTrajectory& traj, double y_min = 0.0, double b0_floor = 1e-8);

// ---- two-component system for the ratio of the two smallest particles ----

struct TildeState {
  double xi = 0.0;
  double q1 = 0.0, dq1 = 0.0;
  double q2 = 0.0, dq2 = 0.0;
  double r = 2.0;
};

struct TildeOptions {
  double eps = 0.0;  // 0: 1e-6 for alpha = 0, 1e-3 otherwise (shooting)
  double tol = 1e-11;
  double x_max = 1e4;
  double outer_tol = 1e-14;  // stop once xi^alpha e^I is below outer_tol * W
  int shooting_iterations = 60;
};

class TildeTrajectory {
 public:
  double alpha() const { return alpha_; }
  double r() const { return r_; }
  double eps() const { return eps_; }
  double x_end() const { return std::exp(sol_.t_end()); }
  bool completed() const { return completed_; }
  double kappa() const { return kappa_; }
  const DenseSolution& dense() const { return sol_; }

  TildeState state_at(double xi) const;
  /// I(x; r) = -(1/4) int_0^x (q1^2 + r q2^2) log(x/xi) dxi
  double I(double x) const;
  /// int_0^x xi^alpha e^{I(xi)} dxi
  double W(double x) const;

 private:
  friend TildeTrajectory tilde_integrate(double, double, const TildeOptions&);
  double alpha_ = 0.0, r_ = 2.0, eps_ = 0.0, kappa_ = 0.0;
  bool completed_ = false;
  DenseSolution sol_;
};

/// Seed of the pair at eps (before the free growing mode is added).
TildeState tilde_seed(double alpha, double r, double eps);

/// For alpha = 0 a plain initial value problem.  For alpha > 0 the
/// coefficient kappa of the free xi^{alpha+2} mode in q1 is fixed by bisection
/// between the two collapse directions (component 0 or q1 reaching zero); the
/// trajectory that runs furthest is returned.
TildeTrajectory tilde_integrate(double alpha, double r, const TildeOptions& opt = {});

double tilde_I(const TildeTrajectory& traj, double x);

struct RatioQResult {
  double q_tilde = 0.0;
  double q_fredholm = 0.0;
  double discrepancy = 0.0;
  double x_cut_tilde = 0.0;
  double x_cut_fredholm = 0.0;
  bool tilde_completed = false;
};

struct RatioQOptions {
  TildeOptions tilde;
  double fd_step = 1e-3;
  double quad_tol = 1e-10;
  double tail_tol = 1e-13;
  bool fredholm_route = true;
};

/// Probability that the second smallest particle exceeds r times the smallest.
RatioQResult ratio_Q(double alpha, double r, const RatioQOptions& opt = {});

/// Integrand of the F-route: d_{r1} d_s F((r1 x, r x), (s, 0)) / x at s=0, r1=1.
double ratio_Q_integrand(double alpha, double r, double x, double h = 1e-3);

}  // namespace besselgap

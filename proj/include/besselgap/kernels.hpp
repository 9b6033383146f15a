#pragma once

#include <vector>

#include <Eigen/Dense>

#include "besselgap/specfun.hpp"

namespace besselgap {

/// Symmetric integral kernel on (0, inf).
class Kernel {
 public:
  virtual ~Kernel() = default;
  virtual double operator()(double x, double y) const = 0;
  /// Matrix K(u_a, u_b).  Subclasses override this to reuse per-node data.
  virtual Eigen::MatrixXd gram(const std::vector<double>& u) const;
  /// Exponent a such that K(x,y) = (xy)^{a/2} E(x,y) with E smooth up to the
  /// origin.  Quadrature on an interval touching 0 uses the weight u^a.
  virtual double origin_exponent() const { return 0.0; }
};

struct BesselKernelSpec {
  double alpha = 0.0;
  // Relative band |x - y| < diag_threshold * max(x, y) in which the diagonal
  // limit at the midpoint replaces the difference quotient.
  double diag_threshold = 1e-5;

  void validate() const;
};

/// Hard-edge Bessel kernel
///   K(x,y) = [J(sx) sy J'(sy) - sx J'(sx) J(sy)] / (2 (x - y)),  sx = sqrt(x),
/// evaluated as [sx J_{a+1}(sx) J_a(sy) - sy J_a(sx) J_{a+1}(sy)] / (2 (x - y)),
/// which is the same expression with the alpha/t parts of J' cancelled by hand.
double bessel_kernel(const BesselKernelSpec& spec, double x, double y);

class BesselKernel final : public Kernel {
 public:
  explicit BesselKernel(BesselKernelSpec spec);
  double operator()(double x, double y) const override { return bessel_kernel(spec_, x, y); }
  Eigen::MatrixXd gram(const std::vector<double>& u) const override;
  double origin_exponent() const override { return spec_.alpha; }
  const BesselKernelSpec& spec() const { return spec_; }

 private:
  BesselKernelSpec spec_;
};

/// Finite-n Laguerre unitary ensemble, weight w(x) = x^alpha e^{-x}.
struct LueModel {
  int n = 1;
  double alpha = 0.0;
  LaguerreRecurrence rec;
  double log_partition = 0.0;  // sum_{j<n} [ln j! + ln Gamma(j + alpha + 1)]
  double diag_threshold = 1e-5;

  static LueModel make(int n, double alpha);
};

/// Weighted orthonormal functions phi_j = sqrt(w) p_j needed by
/// Christoffel-Darboux: (phi_{n-2}, phi_{n-1}, phi_n) at lam.  The recurrence is
/// carried with a running log scale so large n and lam neither overflow nor
/// underflow.
struct LueEdgeValues {
  double phi_nm2 = 0.0;
  double phi_nm1 = 0.0;
  double phi_n = 0.0;
};
LueEdgeValues lue_edge_values(const LueModel& model, double lam);

/// K_n(lam, nu) = sqrt(w(lam) w(nu)) sum_{j<n} p_j(lam) p_j(nu).
double lue_kernel(const LueModel& model, double lam, double nu);

class LueKernel final : public Kernel {
 public:
  explicit LueKernel(LueModel model) : model_(std::move(model)) {}
  double operator()(double x, double y) const override { return lue_kernel(model_, x, y); }
  Eigen::MatrixXd gram(const std::vector<double>& u) const override;
  double origin_exponent() const override { return model_.alpha; }
  const LueModel& model() const { return model_; }

 private:
  LueModel model_;
};

}  // namespace besselgap

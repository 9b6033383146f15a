#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace besselgap {

/// Thrown by a right-hand side that is too close to a singularity to be
/// trusted; the integrator rejects the step and halves h.
class StiffnessSignal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vec = Eigen::VectorXd;
using OdeRhs = std::function<void(double t, const Vec& y, Vec& dydt)>;
/// Called after every accepted step; returning false stops the integration.
using StepCheck = std::function<bool(double t, const Vec& y)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  Vec atol_components;     // per-component atol when non-empty
  double h_initial = 0.0;  // 0: automatic
  double h_min = 1e-13;    // relative to |t1 - t0|
  int max_steps = 500000;
};

/// Piecewise quartic dense output of an explicit Runge-Kutta run.
class DenseSolution {
 public:
  DenseSolution() = default;
  explicit DenseSolution(int dim) : dim_(dim) {}

  void append(double t, double h, const std::array<Vec, 5>& rcont, const Vec& y_end);
  void set_start(double t0, const Vec& y0);

  double t_begin() const { return t_.front(); }
  double t_end() const { return t_.back(); }
  int steps() const { return static_cast<int>(h_.size()); }
  int dim() const { return dim_; }
  const std::vector<double>& grid() const { return t_; }
  const Vec& node_state(int i) const { return y_[i]; }

  Vec state_at(double t) const;
  Vec derivative_at(double t) const;

 private:
  int locate(double t) const;

  int dim_ = 0;
  std::vector<double> t_;  // step boundaries, size steps+1
  std::vector<Vec> y_;     // states at step boundaries
  std::vector<double> h_;
  std::vector<std::array<Vec, 5>> rc_;
};

enum class OdeStatus { Completed, Stopped, Failed };

struct OdeResult {
  OdeStatus status = OdeStatus::Failed;
  DenseSolution solution;
  std::string message;
  int accepted = 0;
  int rejected = 0;
};

/// Dormand-Prince 5(4) with Hairer's 4th-order dense output.
OdeResult dopri5(const OdeRhs& f, double t0, const Vec& y0, double t1, const OdeOptions& opt = {},
                 const StepCheck& check = {});

}  // namespace besselgap

#pragma once

#include <limits>

#include "mrtr/ode_problem.hpp"

namespace mrtr {

struct ToleranceSpec {
  double tau_r = 0.0;
  double tau_a = 1e-6;

  void validate() const;
};

struct ControllerConfig {
  double delta = 0.1;  // partitioning threshold, relative to max eta
  double nu = 0.9;     // safety factor
  int order = 2;
  double h_min = 1e-12;
  double h_max = std::numeric_limits<double>::infinity();
  double max_growth = 5.0;
  int max_rejections = 20;

  void validate() const;
};

/// eta_i = |eps_i| / (tau_r |u_hat_i| + tau_a)
Vector normalized_errors(const Vector& eps, const Vector& u_hat, const ToleranceSpec& tol);

/// max eta <= 1
bool accept_global(const Vector& eta);

/// Components of `scope` whose eta exceeds delta * max eta over the scope.
/// `eta` is aligned with scope.indices(). All-zero errors select nothing.
ActivePartition select_active(const Vector& eta, double delta, const ActivePartition& scope);

/// nu * h * min_j ((tau_r |u_hat_j| + tau_a) / eps_j)^(1/(p+1)), clamped to
/// [h_min, min(h_max, max_growth * h)]. Inputs are aligned over the active set.
double next_step_size(double h_current, const Vector& eps, const Vector& u_hat, const ToleranceSpec& tol,
                      const ControllerConfig& cfg);

}  // namespace mrtr

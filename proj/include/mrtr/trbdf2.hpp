#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>

#include "mrtr/dense_linalg.hpp"
#include "mrtr/ode_problem.hpp"

namespace mrtr {

/// TR-BDF2 as a three-stage FSAL DIRK: stage abscissae (0, gamma, 1), diagonal d,
/// solution weights b = (w, w, d) and the embedded third-order weights b_star.
struct TrBdf2Coefficients {
  static constexpr double gamma = 2.0 - std::numbers::sqrt2;
  static constexpr double d = gamma / 2.0;
  static constexpr double w = std::numbers::sqrt2 / 4.0;
  static constexpr std::array<double, 3> b{w, w, d};
  static constexpr std::array<double, 3> b_star{(1.0 - w) / 3.0, (3.0 * w + 1.0) / 3.0, d / 3.0};
};

enum class NewtonNorm {
  max_abs,   // ||delta||_inf <= tolerance
  weighted,  // max |delta_i| / (tau_r |u_i| + tau_a) <= tolerance
};

struct NewtonConfig {
  double tolerance = 1e-8;
  int max_iterations = 25;
  NewtonNorm norm = NewtonNorm::max_abs;
  double tau_r = 0.0;  // weights for NewtonNorm::weighted
  double tau_a = 1.0;

  void validate() const;
};

/// Outcome of one TR-BDF2 step. Stage derivatives are scaled by h (z = h f).
struct StepResult {
  Vector u_gamma;
  Vector u_next;
  Vector z_n;
  Vector z_gamma;
  Vector z_next;
  Vector eps_raw;
  Vector eps_mod;
  std::array<int, 2> newton_iterations{0, 0};
  Matrix jacobian;
};

/// One TR-BDF2 step of size h from (t, u) for the given (sub)system.
///
/// Both implicit stages iterate on z with the iteration matrix I - d h J,
/// J frozen at (t, u) and factored once. `z_in` is the FSAL stage h f(t, u);
/// it is computed when absent. `jacobian`, when given, replaces the
/// evaluation of J.
///
/// Throws NewtonDivergence when an iteration stalls, SingularMatrix when
/// I - d h J cannot be factored.
StepResult step(const Subsystem& sys, double t, const Vector& u, double h, const std::optional<Vector>& z_in,
                const NewtonConfig& cfg, EvalStats* stats = nullptr, const Matrix* jacobian = nullptr);

/// Convenience overload for the whole problem.
StepResult step(const OdeProblem& p, double t, const Vector& u, double h, const std::optional<Vector>& z_in,
                const NewtonConfig& cfg, EvalStats* stats = nullptr);

/// (b*_1 - b_1) z_n + (b*_2 - b_2) z_gamma + (b*_3 - b_3) z_next.
Vector raw_error_estimate(const Vector& z_n, const Vector& z_gamma, const Vector& z_next);

/// Solves (I - d h J) eps = eps_raw.
Vector modified_error_estimate(const Vector& eps_raw, const Matrix& jac, double h,
                               double d = TrBdf2Coefficients::d);
Vector modified_error_estimate(const Vector& eps_raw, const LuFactorization& iteration_matrix);

/// Stability function R(z) of TR-BDF2 for real or complex z.
template <typename T>
T stability_function(const T& z) {
  constexpr double g = TrBdf2Coefficients::gamma;
  const T num = (1.0 + (1.0 - g) * (1.0 - g)) * z + 2.0 * (2.0 - g);
  const T den = z * z * ((1.0 - g) * g) + z * (g * g - 2.0) + 2.0 * (2.0 - g);
  using std::abs;
  const double scale = abs(z) * abs(z) * ((1.0 - g) * g) + abs(z) * (2.0 - g * g) + 2.0 * (2.0 - g);
  if (!(abs(den) > 1e-15 * scale)) throw Error(ErrorCode::PoleEncountered, "stability_function: denominator vanishes");
  return num / den;
}

}  // namespace mrtr

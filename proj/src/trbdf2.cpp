#include "mrtr/trbdf2.hpp"

#include <limits>

namespace mrtr {

void NewtonConfig::validate() const {
  if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "NewtonConfig: tolerance must be positive");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "NewtonConfig: max_iterations must be >= 1");
  if (norm == NewtonNorm::weighted && !(tau_a > 0.0))
    throw Error(ErrorCode::InvalidArgument, "NewtonConfig: weighted norm needs tau_a > 0");
}

namespace {

using Coef = TrBdf2Coefficients;

double increment_norm(const Vector& delta, const Vector& u_stage, const NewtonConfig& cfg) {
  if (delta.size() == 0) return 0.0;
  if (cfg.norm == NewtonNorm::max_abs) return delta.cwiseAbs().maxCoeff();
  return (delta.cwiseAbs().array() / (cfg.tau_r * u_stage.cwiseAbs().array() + cfg.tau_a)).maxCoeff();
}

// Newton iteration on z for a stage u_stage = base + d z, residual h f(t_stage, u_stage) - z.
// Returns the iteration count; z holds the converged stage derivative.
int solve_stage(const Subsystem& sys, double t_stage, double h, const Vector& base, Vector& z,
                const LuFactorization& iteration_matrix, const NewtonConfig& cfg, EvalStats* stats) {
  double previous = std::numeric_limits<double>::infinity();
  int growth = 0;
  for (int k = 1; k <= cfg.max_iterations; ++k) {
    const Vector u_stage = base + Coef::d * z;
    const Vector residual = h * sys.rhs(t_stage, u_stage, stats) - z;
    const Vector delta = iteration_matrix.solve(residual);
    z += delta;
    const double size = increment_norm(delta, u_stage, cfg);
    if (!std::isfinite(size)) throw Error(ErrorCode::NewtonDivergence, "non-finite Newton increment");
    if (size <= cfg.tolerance) return k;
    growth = size > previous ? growth + 1 : 0;
    if (growth >= 2) throw Error(ErrorCode::NewtonDivergence, "Newton increments grew twice in a row");
    previous = size;
  }
  throw Error(ErrorCode::NewtonDivergence, "Newton iteration cap reached");
}

}  // namespace

StepResult step(const Subsystem& sys, double t, const Vector& u, double h, const std::optional<Vector>& z_in,
                const NewtonConfig& cfg, EvalStats* stats, const Matrix* jacobian) {
  cfg.validate();
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "step: h must be positive");
  const Index n = sys.size();
  if (u.size() != n) throw Error(ErrorCode::DimensionMismatch, "step: state size");

  StepResult r;
  r.z_n = z_in ? *z_in : Vector(h * sys.rhs(t, u, stats));
  if (r.z_n.size() != n) throw Error(ErrorCode::DimensionMismatch, "step: FSAL stage size");

  r.jacobian = jacobian ? *jacobian : sys.jacobian(t, u, stats);
  if (r.jacobian.rows() != n || r.jacobian.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "step: jacobian size");

  if (n == 0) {
    r.u_gamma = r.u_next = u;
    r.z_gamma = r.z_next = r.eps_raw = r.eps_mod = Vector(0);
    return r;
  }

  const LuFactorization iteration_matrix(Matrix(Matrix::Identity(n, n) - Coef::d * h * r.jacobian));

  // Trapezoidal stage to t + gamma h.
  const Vector base_gamma = u + Coef::d * r.z_n;
  r.z_gamma = r.z_n;
  r.newton_iterations[0] = solve_stage(sys, t + Coef::gamma * h, h, base_gamma, r.z_gamma, iteration_matrix, cfg, stats);
  r.u_gamma = base_gamma + Coef::d * r.z_gamma;

  // BDF2 stage to t + h.
  const Vector base_next = u + Coef::w * r.z_n + Coef::w * r.z_gamma;
  r.z_next = r.z_gamma;
  r.newton_iterations[1] = solve_stage(sys, t + h, h, base_next, r.z_next, iteration_matrix, cfg, stats);
  r.u_next = base_next + Coef::d * r.z_next;

  r.eps_raw = raw_error_estimate(r.z_n, r.z_gamma, r.z_next);
  r.eps_mod = modified_error_estimate(r.eps_raw, iteration_matrix);
  return r;
}

StepResult step(const OdeProblem& p, double t, const Vector& u, double h, const std::optional<Vector>& z_in,
                const NewtonConfig& cfg, EvalStats* stats) {
  return step(Subsystem::whole(p), t, u, h, z_in, cfg, stats);
}

Vector raw_error_estimate(const Vector& z_n, const Vector& z_gamma, const Vector& z_next) {
  if (z_n.size() != z_gamma.size() || z_n.size() != z_next.size())
    throw Error(ErrorCode::DimensionMismatch, "raw_error_estimate: stage sizes");
  constexpr auto& b = Coef::b;
  constexpr auto& bs = Coef::b_star;
  return (bs[0] - b[0]) * z_n + (bs[1] - b[1]) * z_gamma + (bs[2] - b[2]) * z_next;
}

Vector modified_error_estimate(const Vector& eps_raw, const Matrix& jac, double h, double d) {
  const Index n = eps_raw.size();
  if (jac.rows() != n || jac.cols() != n) throw Error(ErrorCode::DimensionMismatch, "modified_error_estimate: sizes");
  if (n == 0) return eps_raw;
  return LuFactorization(Matrix(Matrix::Identity(n, n) - d * h * jac)).solve(eps_raw);
}

Vector modified_error_estimate(const Vector& eps_raw, const LuFactorization& iteration_matrix) {
  return iteration_matrix.solve(eps_raw);
}

}  // namespace mrtr

#include "mrtr/step_controller.hpp"

#include <algorithm>
#include <cmath>

namespace mrtr {

void ToleranceSpec::validate() const {
  if (!(tau_r >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ToleranceSpec: tau_r must be >= 0");
  if (!(tau_a > 0.0)) throw Error(ErrorCode::InvalidArgument, "ToleranceSpec: tau_a must be > 0");
}

void ControllerConfig::validate() const {
  if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "ControllerConfig: delta must lie in (0, 1]");
  if (!(nu > 0.0 && nu < 1.0)) throw Error(ErrorCode::InvalidArgument, "ControllerConfig: nu must lie in (0, 1)");
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "ControllerConfig: order must be >= 1");
  if (!(h_min > 0.0 && h_min < h_max)) throw Error(ErrorCode::InvalidArgument, "ControllerConfig: need 0 < h_min < h_max");
  if (!(max_growth > 1.0)) throw Error(ErrorCode::InvalidArgument, "ControllerConfig: max_growth must exceed 1");
  if (max_rejections < 0) throw Error(ErrorCode::InvalidArgument, "ControllerConfig: max_rejections must be >= 0");
}

Vector normalized_errors(const Vector& eps, const Vector& u_hat, const ToleranceSpec& tol) {
  tol.validate();
  if (eps.size() != u_hat.size()) throw Error(ErrorCode::DimensionMismatch, "normalized_errors: sizes");
  return (eps.cwiseAbs().array() / (tol.tau_r * u_hat.cwiseAbs().array() + tol.tau_a)).matrix();
}

bool accept_global(const Vector& eta) { return eta.size() == 0 || eta.maxCoeff() <= 1.0; }

ActivePartition select_active(const Vector& eta, double delta, const ActivePartition& scope) {
  if (eta.size() != scope.size()) throw Error(ErrorCode::DimensionMismatch, "select_active: eta not aligned with scope");
  std::vector<Index> chosen;
  if (scope.empty()) return ActivePartition(std::move(chosen), scope.dimension());
  const double threshold = delta * eta.maxCoeff();
  for (Index k = 0; k < scope.size(); ++k) {
    if (eta(k) > threshold) chosen.push_back(scope[k]);
  }
  return ActivePartition(std::move(chosen), scope.dimension());
}

double next_step_size(double h_current, const Vector& eps, const Vector& u_hat, const ToleranceSpec& tol,
                      const ControllerConfig& cfg) {
  if (eps.size() == 0) throw Error(ErrorCode::EmptyActiveSet, "next_step_size: no components");
  if (eps.size() != u_hat.size()) throw Error(ErrorCode::DimensionMismatch, "next_step_size: sizes");
  if (!(h_current > 0.0)) throw Error(ErrorCode::InvalidArgument, "next_step_size: h must be positive");
  const double exponent = 1.0 / (cfg.order + 1);
  double ratio = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < eps.size(); ++j) {
    const double scale = tol.tau_r * std::abs(u_hat(j)) + tol.tau_a;
    ratio = std::min(ratio, scale / std::max(std::abs(eps(j)), 1e-300));
  }
  const double proposal = cfg.nu * h_current * std::pow(ratio, exponent);
  const double upper = std::min(cfg.h_max, cfg.max_growth * h_current);
  return std::max(cfg.h_min, std::min(proposal, upper));
}

}  // namespace mrtr

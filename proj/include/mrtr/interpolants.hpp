#pragma once

#include <algorithm>
#include <span>

#include "mrtr/trbdf2.hpp"
#include "mrtr/types.hpp"

namespace mrtr {

enum class InterpolantKind { linear, hermite };

const char* to_string(InterpolantKind kind) noexcept;
InterpolantKind interpolant_from_string(const std::string& name);

namespace detail {

// Offsets may overshoot [0, h] by accumulated rounding in the caller's time
// arithmetic; anything further out is an extrapolation request.
inline double checked_offset(double zeta, double h) {
  const double slack = 1e-12 * h;
  if (!(zeta >= -slack && zeta <= h + slack))
    throw Error(ErrorCode::OffsetOutOfRange, "interpolation offset outside [0, h]");
  return std::clamp(zeta, 0.0, h);
}

}  // namespace detail

/// (zeta / h) u_next + ((h - zeta) / h) u_n, for zeta in [0, h].
template <typename D1, typename D2>
typename D1::PlainObject linear_interp(const Eigen::MatrixBase<D1>& u_n, const Eigen::MatrixBase<D2>& u_next,
                                       double h, double zeta) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "linear_interp: h must be positive");
  if (u_n.size() != u_next.size()) throw Error(ErrorCode::DimensionMismatch, "linear_interp: sizes");
  zeta = detail::checked_offset(zeta, h);
  return (zeta / h) * u_next + ((h - zeta) / h) * u_n;
}

/// Three-point Lagrange interpolant through (0, u_n), (h_lambda, u_lambda), (h, u_next).
template <typename D1, typename D2, typename D3>
typename D1::PlainObject quadratic_lagrange(const Eigen::MatrixBase<D1>& u_n, const Eigen::MatrixBase<D2>& u_lambda,
                                            const Eigen::MatrixBase<D3>& u_next, double h_lambda, double h,
                                            double zeta) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "quadratic_lagrange: h must be positive");
  if (!(h_lambda > 0.0 && h_lambda < h)) throw Error(ErrorCode::DegenerateNodes, "quadratic_lagrange: need 0 < h_lambda < h");
  if (u_n.size() != u_lambda.size() || u_n.size() != u_next.size())
    throw Error(ErrorCode::DimensionMismatch, "quadratic_lagrange: sizes");
  zeta = detail::checked_offset(zeta, h);
  const double l_next = (zeta - h_lambda) * zeta / (h * (h - h_lambda));
  const double l_lambda = zeta * (zeta - h) / ((h_lambda - h) * h_lambda);
  const double l_n = (h_lambda - zeta) * (h - zeta) / (h_lambda * h);
  return l_next * u_next + l_lambda * u_lambda + l_n * u_n;
}

/// Stage data of one TR-BDF2 step, sufficient for C^1 dense output on [t_n, t_n + h].
struct HermiteData {
  Vector u_n, u_gamma, u_next;
  Vector z_n, z_gamma, z_next;
  double h = 0.0;
  double gamma = TrBdf2Coefficients::gamma;

  static HermiteData from_step(const Vector& u_n, const StepResult& r, double h);

  Index size() const noexcept { return u_n.size(); }
  void validate() const;
};

/// Piecewise cubic Hermite interpolant on [0, gamma h] and [gamma h, h].
Vector hermite_cubic(const HermiteData& d, double zeta);

/// Same as above, restricted to the listed components.
Vector hermite_cubic(const HermiteData& d, double zeta, std::span<const Index> components);

/// Component i only; zeta must already lie in [0, h].
double hermite_cubic_component(const HermiteData& d, Index i, double zeta);

}  // namespace mrtr

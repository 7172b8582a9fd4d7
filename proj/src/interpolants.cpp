#include "mrtr/interpolants.hpp"

namespace mrtr {

const char* to_string(InterpolantKind kind) noexcept {
  return kind == InterpolantKind::linear ? "linear" : "hermite";
}

InterpolantKind interpolant_from_string(const std::string& name) {
  if (name == "linear") return InterpolantKind::linear;
  if (name == "hermite" || name == "cubic") return InterpolantKind::hermite;
  throw Error(ErrorCode::InvalidArgument, "unknown interpolant '" + name + "'");
}

HermiteData HermiteData::from_step(const Vector& u_n, const StepResult& r, double h) {
  HermiteData d{u_n, r.u_gamma, r.u_next, r.z_n, r.z_gamma, r.z_next, h, TrBdf2Coefficients::gamma};
  d.validate();
  return d;
}

void HermiteData::validate() const {
  const Index m = u_n.size();
  if (u_gamma.size() != m || u_next.size() != m || z_n.size() != m || z_gamma.size() != m || z_next.size() != m)
    throw Error(ErrorCode::DimensionMismatch, "HermiteData: inconsistent sizes");
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "HermiteData: h must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::InvalidArgument, "HermiteData: gamma must lie in (0, 1)");
}

// (a3 - 2 a2) beta^3 + (3 a2 - a3) beta^2 + a1 beta + a0 for one component.
double hermite_cubic_component(const HermiteData& d, Index i, double zeta) {
  const double g = d.gamma;
  double a0, a1, a2, a3, beta;
  if (zeta <= g * d.h) {
    a0 = d.u_n(i);
    a1 = g * d.z_n(i);
    a2 = d.u_gamma(i) - d.u_n(i) - g * d.z_n(i);
    a3 = g * (d.z_gamma(i) - d.z_n(i));
    beta = zeta / (g * d.h);
  } else {
    a0 = d.u_gamma(i);
    a1 = (1.0 - g) * d.z_gamma(i);
    a2 = d.u_next(i) - d.u_gamma(i) - a1;
    a3 = (1.0 - g) * (d.z_next(i) - d.z_gamma(i));
    beta = (zeta - g * d.h) / ((1.0 - g) * d.h);
  }
  return (((a3 - 2.0 * a2) * beta + (3.0 * a2 - a3)) * beta + a1) * beta + a0;
}

Vector hermite_cubic(const HermiteData& d, double zeta) {
  d.validate();
  zeta = detail::checked_offset(zeta, d.h);
  Vector out(d.size());
  for (Index i = 0; i < d.size(); ++i) out(i) = hermite_cubic_component(d, i, zeta);
  return out;
}

Vector hermite_cubic(const HermiteData& d, double zeta, std::span<const Index> components) {
  zeta = detail::checked_offset(zeta, d.h);
  Vector out(static_cast<Index>(components.size()));
  for (std::size_t k = 0; k < components.size(); ++k) {
    const Index i = components[k];
    if (i < 0 || i >= d.size()) throw Error(ErrorCode::DimensionMismatch, "hermite_cubic: component out of range");
    out(static_cast<Index>(k)) = hermite_cubic_component(d, i, zeta);
  }
  return out;
}

}  // namespace mrtr

#include "mrtr/benchmarks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace mrtr {

// ---------------------------------------------------------------- inverter chain

double inverter_g(double y, double z, double u_tau) {
  const double a = std::max(y - u_tau, 0.0);
  const double b = std::max(y - z - u_tau, 0.0);
  return a * a - b * b;
}

double inverter_input(double t) {
  if (t >= 5.0 && t <= 10.0) return t - 5.0;
  if (t > 10.0 && t <= 15.0) return 5.0;
  if (t > 15.0 && t <= 17.0) return 2.5 * (17.0 - t);
  return 0.0;
}

InverterChainParams inverter_chain_desk() {
  InverterChainParams p;
  p.m = 100;
  p.t_end = 20.0;
  return p;
}

BenchmarkPreset inverter_chain(const InverterChainParams& q) {
  if (q.m < 1) throw Error(ErrorCode::InvalidArgument, "inverter_chain: m must be >= 1");
  BenchmarkPreset b;
  b.name = "inverter_chain";
  b.problem.name = "inverter_chain";
  b.problem.dimension = q.m;
  b.problem.rhs = [q](double t, const Vector& y, Vector& dy) {
    const double in = inverter_input(t);
    for (Index j = 0; j < q.m; ++j) {
      const double prev = j == 0 ? in : y(j - 1);
      dy(j) = q.u_op - y(j) - q.gamma * inverter_g(prev, y(j), q.u_tau);
    }
  };
  b.problem.jacobian = [q](double t, const Vector& y, Matrix& jac) {
    jac.setZero();
    const double in = inverter_input(t);
    for (Index j = 0; j < q.m; ++j) {
      const double prev = j == 0 ? in : y(j - 1);
      const double a = std::max(prev - q.u_tau, 0.0);
      const double c = std::max(prev - y(j) - q.u_tau, 0.0);
      jac(j, j) = -1.0 - 2.0 * q.gamma * c;
      if (j > 0) jac(j, j - 1) = -2.0 * q.gamma * (a - c);
    }
  };
  // y_j(0) is 5 for odd j and 6.247e-3 for even j, counting from 1.
  b.u0 = Vector(q.m);
  for (Index i = 0; i < q.m; ++i) b.u0(i) = (i % 2 == 0) ? 5.0 : 6.247e-3;
  b.t_end = q.t_end;
  b.config.tolerances = {0.0, 1e-5};
  b.config.h0 = 1e-3;
  b.reference = ReferenceKind::tight_trbdf2;
  for (double t = 1.0; t < q.t_end; t += 1.0) b.report_times.push_back(t);
  b.report_times.push_back(q.t_end);
  b.parameters = {{"m", static_cast<double>(q.m)}, {"Gamma", q.gamma}, {"U_op", q.u_op}, {"U_tau", q.u_tau},
                  {"T", q.t_end}};
  return b;
}

// ---------------------------------------------------------------- reaction-diffusion

BenchmarkPreset reaction_diffusion(const ReactionDiffusionParams& q) {
  if (q.cells < 3) throw Error(ErrorCode::InvalidArgument, "reaction_diffusion: need at least 3 cells");
  const Index n = q.cells;
  const double dx = q.length / static_cast<double>(n);
  const double lambda = 0.5 * std::sqrt(2.0 * q.gamma / q.eps);
  BenchmarkPreset b;
  b.name = "reaction_diffusion";
  b.problem.name = "reaction_diffusion";
  b.problem.dimension = n;
  const double k = q.eps / (dx * dx);
  const double g = q.gamma;
  b.problem.rhs = [n, k, g](double, const Vector& y, Vector& dy) {
    for (Index i = 0; i < n; ++i) {
      const double l = y(i == 0 ? 0 : i - 1);  // mirror ghosts
      const double r = y(i == n - 1 ? n - 1 : i + 1);
      dy(i) = k * (l - 2.0 * y(i) + r) + g * y(i) * y(i) * (1.0 - y(i));
    }
  };
  b.problem.jacobian = [n, k, g](double, const Vector& y, Matrix& jac) {
    jac.setZero();
    for (Index i = 0; i < n; ++i) {
      jac(i, i) = -2.0 * k + g * (2.0 * y(i) - 3.0 * y(i) * y(i));
      if (i > 0) jac(i, i - 1) += k; else jac(i, i) += k;
      if (i < n - 1) jac(i, i + 1) += k; else jac(i, i) += k;
    }
  };
  SpatialMetadata s;
  s.dx = dx;
  b.u0 = Vector(n);
  for (Index i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * dx;
    s.centers.push_back(x);
    b.u0(i) = 1.0 / (1.0 + std::exp(lambda * (x - 1.0)));
  }
  b.spatial = std::move(s);
  b.t_end = q.t_end;
  b.config.tolerances = {0.0, 1e-4};
  b.config.h0 = 1e-3;
  b.reference = ReferenceKind::tight_trbdf2;
  for (int k = 1; k <= 4; ++k) b.report_times.push_back(q.t_end * k / 4.0);
  b.parameters = {{"cells", static_cast<double>(n)}, {"eps", q.eps}, {"gamma", q.gamma}, {"L", q.length},
                  {"lambda", lambda}, {"T", q.t_end}};
  return b;
}

// ---------------------------------------------------------------- linear advection

namespace {

SpatialMetadata uniform_cells(double lo, double hi, Index n, std::function<double(double)> fprime) {
  SpatialMetadata s;
  s.dx = (hi - lo) / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) s.centers.push_back(lo + (static_cast<double>(i) + 0.5) * s.dx);
  s.flux_derivative = std::move(fprime);
  return s;
}

// The tabulated times that fall inside (0, t_end], plus t_end itself.
std::vector<double> within(double t_end, std::vector<double> times) {
  std::erase_if(times, [t_end](double t) { return t >= t_end; });
  times.push_back(t_end);
  return times;
}

StepProbe max_wave_speed(std::function<double(double)> fprime) {
  return [fprime](const Vector& state, std::span<const Index> comps) {
    double m = 0.0;
    if (comps.empty()) {
      for (Index i = 0; i < state.size(); ++i) m = std::max(m, std::abs(fprime(state(i))));
    } else {
      for (const Index i : comps) m = std::max(m, std::abs(fprime(state(i))));
    }
    return m;
  };
}

}  // namespace

BenchmarkPreset linear_advection(const AdvectionParams& q) {
  if (q.cells < 4) throw Error(ErrorCode::InvalidArgument, "linear_advection: need at least 4 cells");
  if (!(q.sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "linear_advection: sigma must be positive");
  const Index n = q.cells;
  const double lo = -20.0, hi = 20.0;
  BenchmarkPreset b;
  b.name = "linear_advection";
  b.spatial = uniform_cells(lo, hi, n, [](double) { return 1.0; });
  const double inv_dx = 1.0 / b.spatial->dx;
  b.problem.name = "linear_advection";
  b.problem.dimension = n;
  b.problem.rhs = [n, inv_dx](double, const Vector& y, Vector& dy) {
    for (Index i = 0; i < n; ++i) dy(i) = -(y(i) - y(i == 0 ? n - 1 : i - 1)) * inv_dx;
  };
  b.problem.jacobian = [n, inv_dx](double, const Vector&, Matrix& jac) {
    jac.setZero();
    for (Index i = 0; i < n; ++i) {
      jac(i, i) = -inv_dx;
      jac(i, i == 0 ? n - 1 : i - 1) = inv_dx;
    }
  };
  const double width = 2.0 * q.sigma * q.sigma;
  auto profile = [width, lo, hi](double x) {
    const double period = hi - lo;
    x = lo + std::fmod(std::fmod(x - lo, period) + period, period);
    return std::exp(-x * x / width);
  };
  const std::vector<double> centers = b.spatial->centers;
  b.u0 = Vector(n);
  for (Index i = 0; i < n; ++i) b.u0(i) = profile(centers[static_cast<std::size_t>(i)]);
  b.exact = [centers, profile](double t) {
    Vector u(static_cast<Index>(centers.size()));
    for (std::size_t i = 0; i < centers.size(); ++i) u(static_cast<Index>(i)) = profile(centers[i] - t);
    return u;
  };
  b.t_end = q.t_end;
  b.config.tolerances = {1e-6, 1e-8};
  b.config.h0 = 1e-2;
  b.config.probe = max_wave_speed(b.spatial->flux_derivative);
  b.reference = ReferenceKind::explicit_pair;
  b.report_times = within(q.t_end, {0.2, 1.0, 1.8, 2.8});
  b.parameters = {{"cells", static_cast<double>(n)}, {"sigma", q.sigma}, {"T", q.t_end}};
  return b;
}

// ---------------------------------------------------------------- Burgers

double rusanov_flux(double a, double b) {
  return 0.5 * (0.5 * a * a + 0.5 * b * b) - 0.5 * std::max(std::abs(a), std::abs(b)) * (b - a);
}

namespace {

// Partial derivatives of the Rusanov flux; the dissipation coefficient is
// differentiated through the larger of the two speeds.
std::array<double, 2> rusanov_partials(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  const bool left_dominates = std::abs(a) >= std::abs(b);
  const double ds_da = left_dominates ? (a >= 0.0 ? 1.0 : -1.0) : 0.0;
  const double ds_db = left_dominates ? 0.0 : (b >= 0.0 ? 1.0 : -1.0);
  return {0.5 * a - 0.5 * ds_da * (b - a) + 0.5 * s, 0.5 * b - 0.5 * ds_db * (b - a) - 0.5 * s};
}

}  // namespace

BenchmarkPreset burgers_riemann(const BurgersParams& q) {
  if (q.cells < 4) throw Error(ErrorCode::InvalidArgument, "burgers_riemann: need at least 4 cells");
  const Index n = q.cells;
  BenchmarkPreset b;
  b.name = "burgers";
  b.spatial = uniform_cells(-1.0, 3.0, n, [](double u) { return u; });
  const double inv_dx = 1.0 / b.spatial->dx;
  const double ul = q.u_l, ur = q.u_r;
  b.problem.name = "burgers";
  b.problem.dimension = n;
  // Ghost cells hold the far-field states.
  b.problem.rhs = [n, inv_dx, ul, ur](double, const Vector& y, Vector& dy) {
    double left = rusanov_flux(ul, y(0));
    for (Index i = 0; i < n; ++i) {
      const double right = rusanov_flux(y(i), i + 1 < n ? y(i + 1) : ur);
      dy(i) = -(right - left) * inv_dx;
      left = right;
    }
  };
  b.problem.jacobian = [n, inv_dx, ul, ur](double, const Vector& y, Matrix& jac) {
    jac.setZero();
    for (Index i = 0; i < n; ++i) {
      const auto fr = rusanov_partials(y(i), i + 1 < n ? y(i + 1) : ur);
      const auto fl = rusanov_partials(i > 0 ? y(i - 1) : ul, y(i));
      jac(i, i) = -(fr[0] - fl[1]) * inv_dx;
      if (i + 1 < n) jac(i, i + 1) = -fr[1] * inv_dx;
      if (i > 0) jac(i, i - 1) = fl[0] * inv_dx;
    }
  };
  const std::vector<double> centers = b.spatial->centers;
  b.u0 = Vector(n);
  for (Index i = 0; i < n; ++i) b.u0(i) = centers[static_cast<std::size_t>(i)] < 0.0 ? ul : ur;
  b.exact = [centers, ul, ur](double t) {
    Vector u(static_cast<Index>(centers.size()));
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const double x = centers[i];
      double v;
      if (t <= 0.0) {
        v = x < 0.0 ? ul : ur;
      } else if (ul > ur) {
        v = x < 0.5 * (ul + ur) * t ? ul : ur;  // Rankine-Hugoniot speed
      } else {
        v = std::clamp(x / t, ul, ur);
      }
      u(static_cast<Index>(i)) = v;
    }
    return u;
  };
  b.t_end = q.t_end;
  b.config.tolerances = {1e-4, 1e-6};
  b.config.newton.tolerance = 1e-8;
  b.config.h0 = 1e-2;
  b.config.probe = max_wave_speed(b.spatial->flux_derivative);
  b.reference = ReferenceKind::explicit_pair;
  b.report_times = within(q.t_end, {0.2, 0.5, 0.8, 0.99});
  b.parameters = {{"cells", static_cast<double>(n)}, {"u_l", ul}, {"u_r", ur}, {"T", q.t_end}};
  return b;
}

// ---------------------------------------------------------------- registry

std::vector<std::string> preset_names() {
  return {"inverter_chain", "inverter_chain_full", "reaction_diffusion", "linear_advection", "burgers"};
}

BenchmarkPreset make_preset(const std::string& name, const PresetOptions& o) {
  if (name == "inverter_chain" || name == "inverter_chain_full") {
    InverterChainParams p = name == "inverter_chain" ? inverter_chain_desk() : InverterChainParams{};
    if (o.size) p.m = *o.size;
    if (o.t_end) p.t_end = *o.t_end;
    return inverter_chain(p);
  }
  if (name == "reaction_diffusion") {
    ReactionDiffusionParams p;
    if (o.size) p.cells = *o.size;
    if (o.t_end) p.t_end = *o.t_end;
    return reaction_diffusion(p);
  }
  if (name == "linear_advection" || name == "advection") {
    AdvectionParams p;
    if (o.size) p.cells = *o.size;
    if (o.t_end) p.t_end = *o.t_end;
    if (o.sigma) p.sigma = *o.sigma;
    return linear_advection(p);
  }
  if (name == "burgers" || name == "burgers_riemann") {
    BurgersParams p;
    if (o.size) p.cells = *o.size;
    if (o.t_end) p.t_end = *o.t_end;
    if (o.u_l) p.u_l = *o.u_l;
    if (o.u_r) p.u_r = *o.u_r;
    return burgers_riemann(p);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
}

// ---------------------------------------------------------------- diagnostics

std::vector<CourantSample> courant_numbers(const IntegrationTrace& trace, const BenchmarkPreset& preset) {
  if (!preset.spatial || !preset.spatial->flux_derivative || !(preset.spatial->dx > 0.0))
    throw Error(ErrorCode::MissingSpatialMetadata, "preset '" + preset.name + "' has no flux derivative / grid");
  std::vector<CourantSample> out;
  out.reserve(trace.steps.size());
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const StepRecord& s = trace.steps[k];
    if (std::isnan(s.probe))
      throw Error(ErrorCode::MissingSpatialMetadata, "trace has no wave-speed probe values");
    out.push_back({k, s.macro_index, s.level, s.t_start, s.h, s.probe * s.h / preset.spatial->dx, s.level == 0});
  }
  return out;
}

double relative_linf_error(const Vector& num, const Vector& ref) {
  if (num.size() != ref.size()) throw Error(ErrorCode::DimensionMismatch, "relative_linf_error: sizes");
  const double scale = ref.cwiseAbs().maxCoeff();
  const double diff = (num - ref).cwiseAbs().maxCoeff();
  if (scale == 0.0) return diff;
  return diff / scale;
}

std::vector<ErrorRow> error_table(const Trajectory& traj, const BenchmarkPreset& preset, const std::vector<double>& times,
                                  const std::vector<Vector>& reference) {
  if (!reference.empty() && reference.size() != times.size())
    throw Error(ErrorCode::DimensionMismatch, "error_table: reference not aligned with times");
  std::vector<ErrorRow> rows;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Vector u = traj.state_at(times[k]);
    ErrorRow r{times[k], nan, nan};
    if (preset.exact) r.vs_exact = relative_linf_error(u, preset.exact(times[k]));
    if (!reference.empty()) r.vs_reference = relative_linf_error(u, reference[k]);
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------- reference integrators

std::vector<Vector> dormand_prince(const OdeProblem& p, double t0, const Vector& u0, const std::vector<double>& times,
                                   const DormandPrinceConfig& cfg, EvalStats* stats) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::vector<Vector> out;
  Vector y = u0;
  double t = t0;
  double h = cfg.h0;
  Vector k1 = eval_rhs(p, t, y, stats);
  std::int64_t steps = 0;
  for (const double target : times) {
    if (target < t) throw Error(ErrorCode::InvalidArgument, "dormand_prince: times must be increasing");
    while (t < target) {
      if (++steps > cfg.max_steps) throw Error(ErrorCode::SafetyCapExceeded, "dormand_prince: step cap");
      const bool last = t + h >= target;
      const double hh = last ? target - t : h;
      const Vector k2 = eval_rhs(p, t + c2 * hh, y + hh * a21 * k1, stats);
      const Vector k3 = eval_rhs(p, t + c3 * hh, y + hh * (a31 * k1 + a32 * k2), stats);
      const Vector k4 = eval_rhs(p, t + c4 * hh, y + hh * (a41 * k1 + a42 * k2 + a43 * k3), stats);
      const Vector k5 = eval_rhs(p, t + c5 * hh, y + hh * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), stats);
      const Vector k6 =
          eval_rhs(p, t + hh, y + hh * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), stats);
      const Vector y_new = y + hh * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Vector k7 = eval_rhs(p, t + hh, y_new, stats);
      const Vector err = hh * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double norm = 0.0;
      for (Index i = 0; i < y.size(); ++i) {
        const double sc = cfg.tau_a + cfg.tau_r * std::max(std::abs(y(i)), std::abs(y_new(i)));
        norm = std::max(norm, std::abs(err(i)) / sc);
      }
      const double factor = std::clamp(0.9 * std::pow(std::max(norm, 1e-10), -0.2), 0.2, 5.0);
      if (norm <= 1.0) {
        t = last ? target : t + hh;
        y = y_new;
        k1 = k7;
        if (!last) h = hh * factor;
        else h = std::max(h, hh * factor);
      } else {
        h = hh * std::min(factor, 1.0);
        if (h < 1e-14 * std::max(1.0, std::abs(t))) throw Error(ErrorCode::StepFloorReached, "dormand_prince: h underflow");
      }
    }
    out.push_back(y);
  }
  return out;
}

std::vector<Vector> reference_solution(const BenchmarkPreset& preset, const std::vector<double>& times) {
  if (preset.reference == ReferenceKind::explicit_pair) return dormand_prince(preset.problem, preset.t0, preset.u0, times);
  MultirateConfig cfg = preset.config;
  cfg.tolerances.tau_r /= 100.0;
  cfg.tolerances.tau_a /= 100.0;
  cfg.controller.h_max = 1e-3;
  cfg.h0 = std::min(cfg.h0, 1e-3);
  cfg.probe = {};
  cfg.output_times = times;
  const double t_end = *std::max_element(times.begin(), times.end());
  const IntegrationResult r = integrate_single_rate(preset.problem, preset.t0, t_end, preset.u0, cfg);
  std::vector<Vector> out;
  for (const double t : times) out.push_back(t == preset.t0 ? preset.u0 : r.trajectory.state_at(t));
  return out;
}

}  // namespace mrtr

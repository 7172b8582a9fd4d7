#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrtr/multirate.hpp"

namespace mrtr {

/// Cell geometry of a method-of-lines problem, for Courant numbers.
struct SpatialMetadata {
  double dx = 0.0;
  std::vector<double> centers;
  std::function<double(double u)> flux_derivative;
};

enum class ReferenceKind {
  explicit_pair,  // Dormand-Prince 5(4) at 1e-11 / 1e-13
  tight_trbdf2,   // single-rate TR-BDF2, tolerances 100x tighter, h_max 1e-3
};

struct BenchmarkPreset {
  std::string name;
  OdeProblem problem;
  double t0 = 0.0;
  double t_end = 1.0;
  Vector u0;
  MultirateConfig config;
  /// PDE solution sampled at the cell centres, when one is known.
  std::function<Vector(double t)> exact;
  ReferenceKind reference = ReferenceKind::explicit_pair;
  std::optional<SpatialMetadata> spatial;
  /// Times at which the experiments tabulate solutions and errors.
  std::vector<double> report_times;
  /// Numeric parameters, for run manifests.
  std::map<std::string, double> parameters;
};

struct InverterChainParams {
  Index m = 500;
  double gamma = 100.0;
  double u_op = 5.0;
  double u_tau = 1.0;
  double t_end = 130.0;
};

/// g(y, z) = max(y - U_tau, 0)^2 - max(y - z - U_tau, 0)^2
double inverter_g(double y, double z, double u_tau);
/// Input ramp applied to the first inverter.
double inverter_input(double t);
InverterChainParams inverter_chain_desk();
BenchmarkPreset inverter_chain(const InverterChainParams& params = {});

struct ReactionDiffusionParams {
  Index cells = 200;
  double eps = 0.01;
  double gamma = 100.0;
  double length = 5.0;
  double t_end = 3.0;
};
/// y' = eps y_xx + gamma y^2 (1 - y) with zero-flux ends on a cell-centred grid.
BenchmarkPreset reaction_diffusion(const ReactionDiffusionParams& params = {});

struct AdvectionParams {
  Index cells = 400;
  double sigma = 0.2;  // Gaussian width: u0 = exp(-x^2 / (2 sigma^2))
  double t_end = 3.0;
};
/// First-order upwind for u_t + u_x = 0 on [-20, 20], periodic.
BenchmarkPreset linear_advection(const AdvectionParams& params = {});

struct BurgersParams {
  Index cells = 400;
  double u_l = 1.0;
  double u_r = 0.0;
  double t_end = 1.0;
};
/// Rusanov finite volumes for u_t + (u^2/2)_x = 0 on [-1, 3], Riemann data at x = 0.
BenchmarkPreset burgers_riemann(const BurgersParams& params = {});
double rusanov_flux(double a, double b);

/// Overrides accepted by make_preset; unset fields keep the preset defaults.
struct PresetOptions {
  std::optional<Index> size;  // cells, or inverters for the chain
  std::optional<double> t_end;
  std::optional<double> u_l, u_r;
  std::optional<double> sigma;
};

/// inverter_chain (m=100, T=20), inverter_chain_full (m=500, T=130),
/// reaction_diffusion, linear_advection, burgers. Throws InvalidArgument.
BenchmarkPreset make_preset(const std::string& name, const PresetOptions& opts = {});
std::vector<std::string> preset_names();

struct CourantSample {
  std::size_t step = 0;
  std::int64_t macro_index = 0;
  int level = 0;
  double t = 0.0;
  double h = 0.0;
  double courant = 0.0;
  bool global = false;  // tentative macro step rather than a refined one
};

/// max |f'(u_i)| h / dx per accepted step, from the probe values in the trace.
/// Throws MissingSpatialMetadata for presets without a spatial grid.
std::vector<CourantSample> courant_numbers(const IntegrationTrace& trace, const BenchmarkPreset& preset);

/// ||num - ref||_inf / ||ref||_inf
double relative_linf_error(const Vector& num, const Vector& ref);

struct ErrorRow {
  double t = 0.0;
  double vs_exact = 0.0;      // NaN when no exact solution exists
  double vs_reference = 0.0;  // NaN when no reference states were given
};

/// Errors of the trajectory at `times` against the exact solution and, when
/// given, reference states aligned with `times`.
std::vector<ErrorRow> error_table(const Trajectory& traj, const BenchmarkPreset& preset, const std::vector<double>& times,
                                  const std::vector<Vector>& reference = {});

struct DormandPrinceConfig {
  double tau_r = 1e-11;
  double tau_a = 1e-13;
  double h0 = 1e-4;
  std::int64_t max_steps = 50'000'000;
};

/// Adaptive Dormand-Prince 5(4), stepping exactly onto each requested time.
std::vector<Vector> dormand_prince(const OdeProblem& p, double t0, const Vector& u0, const std::vector<double>& times,
                                   const DormandPrinceConfig& cfg = {}, EvalStats* stats = nullptr);

/// Semidiscrete reference states at `times` using the preset's reference kind.
std::vector<Vector> reference_solution(const BenchmarkPreset& preset, const std::vector<double>& times);

}  // namespace mrtr

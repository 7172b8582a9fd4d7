#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mrtr/interpolants.hpp"
#include "mrtr/ode_problem.hpp"
#include "mrtr/step_controller.hpp"
#include "mrtr/trbdf2.hpp"

namespace mrtr {

/// Optional per-step observer: receives the state at the start of an accepted
/// step and the components that step computed; its value is stored in the
/// trace (the benchmarks use it for the maximum wave speed).
using StepProbe = std::function<double(const Vector& state, std::span<const Index> components)>;

struct MultirateConfig {
  ToleranceSpec tolerances;
  ControllerConfig controller;
  InterpolantKind interpolant = InterpolantKind::hermite;
  double h0 = 1e-2;
  NewtonConfig newton;
  std::int64_t max_micro_steps = 1'000'000;  // per macro step

  /// Times the macro grid must hit exactly; states there are kept in the trajectory.
  std::vector<double> output_times;
  /// Keep the state after every accepted macro step, not only at output times.
  bool record_every_step = false;
  StepProbe probe;

  void validate() const;
};

/// One accepted step: the tentative macro step (level 0) or a micro step (level >= 1).
struct StepRecord {
  std::int64_t macro_index = 0;
  int level = 0;
  double t_start = 0.0;
  double h = 0.0;
  /// Components computed by the step; empty with `all_components` set for macro steps.
  std::vector<Index> components;
  bool all_components = false;
  double eta_max = 0.0;
  int newton_iterations = 0;
  double probe = std::numeric_limits<double>::quiet_NaN();
};

struct MacroRecord {
  double t = 0.0;
  double h = 0.0;
  int rejections = 0;
  int micro_rejections = 0;
  double eta_max = 0.0;
  Index refined = 0;  // |A^0|
};

struct IntegrationTrace {
  Index dimension = 0;
  std::vector<MacroRecord> macro_steps;
  std::vector<StepRecord> steps;
  EvalStats stats;
  std::int64_t accepted_steps = 0;
  std::int64_t rejected_steps = 0;

  Index components_in(const StepRecord& s) const {
    return s.all_components ? dimension : static_cast<Index>(s.components.size());
  }
};

/// Number of (component, accepted step) pairs: m per macro step plus |active| per micro step.
std::int64_t workload(const IntegrationTrace& trace);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  /// Stages of the last tentative macro step, for dense output near the final time.
  std::optional<HermiteData> last_interval;
  double last_interval_start = 0.0;

  /// Recorded state at t (to 1e-12 relative), or Hermite dense output inside the final interval.
  Vector state_at(double t) const;
  const Vector& final_state() const { return states.back(); }
};

/// h f(t, u) carried from the end of one macro step to the start of the next.
struct FsalStage {
  Vector z;
  double h = 0.0;
};

struct MacroStepResult {
  Vector u_next;
  double h_used = 0.0;
  double h_proposed = 0.0;
  std::optional<FsalStage> fsal;  // only when no component was refined
  HermiteData tentative;
};

/// One self-adjusting multirate step from (t, u) with trial size h.
///
/// The tentative step over all components is retried with a smaller size
/// until the components left unrefined meet the tolerance. Components above
/// delta * max eta are then advanced with micro steps over [t, t + h_used],
/// latent components being reconstructed by the configured interpolant.
MacroStepResult macro_step(const OdeProblem& p, double t, const Vector& u, double h, const MultirateConfig& cfg,
                           const std::optional<FsalStage>& fsal, IntegrationTrace& trace);

struct IntegrationResult {
  Trajectory trajectory;
  IntegrationTrace trace;
};

IntegrationResult integrate(const OdeProblem& p, double t0, double t_end, const Vector& u0,
                            const MultirateConfig& cfg);

/// Adaptive single-rate TR-BDF2: the same driver with partitioning disabled (delta = 1).
IntegrationResult integrate_single_rate(const OdeProblem& p, double t0, double t_end, const Vector& u0,
                                        const MultirateConfig& cfg);

/// Fixed-step single-rate TR-BDF2 with FSAL; no error control.
IntegrationResult integrate_fixed_step(const OdeProblem& p, double t0, double t_end, const Vector& u0, double h,
                                       const NewtonConfig& newton = {});

}  // namespace mrtr

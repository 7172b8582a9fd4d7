#include "mrtr/multirate.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace mrtr {

void MultirateConfig::validate() const {
  tolerances.validate();
  controller.validate();
  newton.validate();
  if (!(h0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "MultirateConfig: h0 must be positive");
  if (max_micro_steps < 1) throw Error(ErrorCode::InvalidArgument, "MultirateConfig: max_micro_steps must be >= 1");
}

std::int64_t workload(const IntegrationTrace& trace) {
  std::int64_t total = 0;
  for (const auto& s : trace.steps) total += trace.components_in(s);
  return total;
}

Vector Trajectory::state_at(double t) const {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return states[k];
  }
  if (last_interval) return hermite_cubic(*last_interval, t - last_interval_start);
  throw Error(ErrorCode::OffsetOutOfRange, "Trajectory: no state recorded at requested time");
}

namespace {

bool recoverable(const Error& e) {
  return e.code() == ErrorCode::NewtonDivergence || e.code() == ErrorCode::NonFiniteOutput ||
         e.code() == ErrorCode::SingularMatrix;
}

double max_or_zero(const Vector& v) { return v.size() > 0 ? v.maxCoeff() : 0.0; }

// Values of components that are not integrated by the current micro step.
// Components latent from the start follow the macro-interval interpolant;
// components deactivated at t_drop follow the line from their last computed
// value to the tentative endpoint.
class LatentModel {
 public:
  LatentModel(const HermiteData& macro, double t_n, InterpolantKind kind)
      : macro_(macro),
        t_n_(t_n),
        kind_(kind),
        drop_time_(static_cast<std::size_t>(macro.size()), std::numeric_limits<double>::quiet_NaN()),
        drop_value_(static_cast<std::size_t>(macro.size()), 0.0) {}

  void drop(Index i, double t, double value) {
    drop_time_[static_cast<std::size_t>(i)] = t;
    drop_value_[static_cast<std::size_t>(i)] = value;
  }

  void fill(double t, Vector& full, std::span<const Index> idle) const {
    // Stage times come from the micro loop and can only miss [t_n, t_n + h] by rounding.
    const double zeta = std::clamp(t - t_n_, 0.0, macro_.h);
    for (const Index i : idle) full(i) = value(i, t, zeta);
  }

 private:
  double value(Index i, double t, double zeta) const {
    const auto k = static_cast<std::size_t>(i);
    const double end = macro_.u_next(i);
    if (!std::isnan(drop_time_[k])) {
      const double window = t_n_ + macro_.h - drop_time_[k];
      if (!(window > 0.0)) return end;
      const double s = std::clamp((t - drop_time_[k]) / window, 0.0, 1.0);
      return s * end + (1.0 - s) * drop_value_[k];
    }
    if (kind_ == InterpolantKind::linear) return (zeta / macro_.h) * end + ((macro_.h - zeta) / macro_.h) * macro_.u_n(i);
    return hermite_cubic_component(macro_, i, zeta);
  }

  const HermiteData& macro_;
  double t_n_;
  InterpolantKind kind_;
  std::vector<double> drop_time_;
  std::vector<double> drop_value_;
};

StepRecord make_record(std::int64_t macro_index, int level, double t, double h, const StepResult& r,
                       double eta_max) {
  StepRecord s;
  s.macro_index = macro_index;
  s.level = level;
  s.t_start = t;
  s.h = h;
  s.eta_max = eta_max;
  s.newton_iterations = r.newton_iterations[0] + r.newton_iterations[1];
  return s;
}

}  // namespace

MacroStepResult macro_step(const OdeProblem& p, double t, const Vector& u, double h, const MultirateConfig& cfg,
                           const std::optional<FsalStage>& fsal, IntegrationTrace& trace) {
  const Index m = p.dimension;
  if (u.size() != m) throw Error(ErrorCode::DimensionMismatch, "macro_step: state size");
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "macro_step: h must be positive");
  const auto& ctl = cfg.controller;
  const auto& tol = cfg.tolerances;
  const bool partitioned = ctl.delta < 1.0;
  const ActivePartition all = ActivePartition::full(m);
  const Subsystem whole = Subsystem::whole(p);
  const auto macro_index = static_cast<std::int64_t>(trace.macro_steps.size());

  // 1) tentative step over all components; 2) partition.
  StepResult tent;
  Vector eta;
  ActivePartition refined;
  int rejections = 0;
  for (;;) {
    std::optional<Vector> z_in;
    if (fsal) z_in = fsal->h == h ? fsal->z : Vector((h / fsal->h) * fsal->z);
    double h_retry = 0.5 * h;
    try {
      tent = step(whole, t, u, h, z_in, cfg.newton, &trace.stats);
      eta = normalized_errors(tent.eps_mod, tent.u_next, tol);
      refined = partitioned ? select_active(eta, ctl.delta, all) : ActivePartition::none(m);
      // Components that will not be refined keep the tentative values and must
      // meet the tolerance; refined ones are corrected by the micro steps.
      const ActivePartition latent = refined.complement();
      const ActivePartition& judged = latent.empty() ? all : latent;
      if (accept_global(judged.gather(eta))) break;
      h_retry = next_step_size(h, judged.gather(tent.eps_mod), judged.gather(tent.u_next), tol, ctl);
    } catch (const Error& e) {
      if (!recoverable(e)) throw;
    }
    ++rejections;
    ++trace.rejected_steps;
    if (rejections > ctl.max_rejections)
      throw Error(ErrorCode::TooManyRejections, "macro step rejected too often at t=" + std::to_string(t));
    if (h <= ctl.h_min) throw Error(ErrorCode::StepFloorReached, "macro step at h_min still rejected");
    // A formula proposal that does not shrink the step falls back to halving.
    h = std::max(h_retry < h ? h_retry : 0.5 * h, ctl.h_min);
  }

  StepRecord macro_rec = make_record(macro_index, 0, t, h, tent, max_or_zero(eta));
  macro_rec.all_components = true;
  if (cfg.probe) macro_rec.probe = cfg.probe(u, all.indices());
  trace.steps.push_back(std::move(macro_rec));
  ++trace.accepted_steps;

  MacroStepResult out;
  out.h_used = h;
  out.tentative = HermiteData::from_step(u, tent, h);
  out.u_next = tent.u_next;

  MacroRecord macro{t, h, rejections, 0, max_or_zero(eta), refined.size()};

  if (refined.empty()) {
    out.h_proposed = next_step_size(h, tent.eps_mod, tent.u_next, tol, ctl);
    out.fsal = FsalStage{tent.z_next, h};
    trace.macro_steps.push_back(macro);
    return out;
  }

  const ActivePartition latent0 = refined.complement();
  out.h_proposed = latent0.empty()
                       ? next_step_size(h, tent.eps_mod, tent.u_next, tol, ctl)
                       : next_step_size(h, latent0.gather(tent.eps_mod), latent0.gather(tent.u_next), tol, ctl);

  // 3) micro steps over [t, t + h] for the active components.
  const double t_next = t + h;
  LatentModel model(out.tentative, t, cfg.interpolant);

  // Components whose tentative value misses the tolerance stay active to the end.
  std::vector<char> pinned(static_cast<std::size_t>(m), 0);
  for (const Index i : refined.indices()) pinned[static_cast<std::size_t>(i)] = eta(i) > 1.0;

  ActivePartition active = refined;
  Vector state = u;
  double t_k = t;
  double h_k = next_step_size(h, active.gather(tent.eps_mod), active.gather(tent.u_next), tol, ctl);
  int level = 0;
  int streak = 0;
  std::int64_t attempts = 0;

  while (true) {
    if (++attempts > cfg.max_micro_steps)
      throw Error(ErrorCode::SafetyCapExceeded, "micro step cap exceeded at t=" + std::to_string(t_k));
    double t_end = t_k + h_k;
    const bool last = t_end >= t_next;
    if (last) t_end = t_next;
    const double hh = t_end - t_k;
    if (!(hh > 0.0)) throw Error(ErrorCode::StepFloorReached, "micro step size underflow");

    const ActivePartition idle_part = active.complement();
    const auto idle = std::make_shared<const std::vector<Index>>(idle_part.indices().begin(), idle_part.indices().end());
    Vector frozen = state;
    model.fill(t_k, frozen, *idle);
    const Subsystem sub(p, active, frozen,
                        [&model, idle](double s, Vector& full) { model.fill(s, full, *idle); });

    const Vector x = active.gather(state);
    StepResult r;
    Vector eta_k;
    bool accepted = false;
    double h_retry = 0.5 * hh;
    try {
      r = step(sub, t_k, x, hh, std::nullopt, cfg.newton, &trace.stats);
      eta_k = normalized_errors(r.eps_mod, r.u_next, tol);
      accepted = accept_global(eta_k);
      if (!accepted) h_retry = next_step_size(hh, r.eps_mod, r.u_next, tol, ctl);
    } catch (const Error& e) {
      if (!recoverable(e)) throw;
    }
    if (!accepted) {
      ++macro.micro_rejections;
      ++trace.rejected_steps;
      if (++streak > ctl.max_rejections)
        throw Error(ErrorCode::TooManyRejections, "micro step rejected too often at t=" + std::to_string(t_k));
      if (hh <= ctl.h_min) throw Error(ErrorCode::StepFloorReached, "micro step at h_min still rejected");
      h_k = std::max(h_retry < hh ? h_retry : 0.5 * hh, ctl.h_min);
      continue;
    }
    streak = 0;

    StepRecord rec = make_record(macro_index, ++level, t_k, hh, r, max_or_zero(eta_k));
    rec.components.assign(active.indices().begin(), active.indices().end());
    if (cfg.probe) rec.probe = cfg.probe(frozen, active.indices());
    trace.steps.push_back(std::move(rec));
    ++trace.accepted_steps;

    active.scatter(r.u_next, state);
    if (last) break;
    t_k = t_end;

    // Re-partition the active set; dropped components become latent.
    const ActivePartition selected = select_active(eta_k, ctl.delta, active);
    std::vector<Index> keep;
    std::vector<Index> kept_pos;
    for (Index k = 0; k < active.size(); ++k) {
      const Index i = active[k];
      if (selected.contains(i) || pinned[static_cast<std::size_t>(i)]) {
        keep.push_back(i);
        kept_pos.push_back(k);
      } else {
        model.drop(i, t_k, state(i));
      }
    }
    if (keep.empty()) {
      active = ActivePartition::none(m);
      break;
    }
    Vector eps_keep(static_cast<Index>(keep.size()));
    Vector u_keep(static_cast<Index>(keep.size()));
    for (std::size_t q = 0; q < kept_pos.size(); ++q) {
      eps_keep(static_cast<Index>(q)) = r.eps_mod(kept_pos[q]);
      u_keep(static_cast<Index>(q)) = r.u_next(kept_pos[q]);
    }
    active = ActivePartition(std::move(keep), m);
    h_k = next_step_size(hh, eps_keep, u_keep, tol, ctl);
  }

  // Latent and dropped components end on the tentative solution.
  for (const Index i : active.indices()) out.u_next(i) = state(i);
  trace.macro_steps.push_back(macro);
  return out;
}

IntegrationResult integrate(const OdeProblem& p, double t0, double t_end, const Vector& u0,
                            const MultirateConfig& cfg) {
  cfg.validate();
  if (!(t_end > t0)) throw Error(ErrorCode::InvalidArgument, "integrate: t_end must exceed t0");
  if (u0.size() != p.dimension) throw Error(ErrorCode::DimensionMismatch, "integrate: initial state size");

  std::vector<double> outputs;
  for (const double s : cfg.output_times)
    if (s > t0 && s < t_end) outputs.push_back(s);
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
  outputs.push_back(t_end);

  IntegrationResult res;
  res.trace.dimension = p.dimension;
  res.trajectory.times.push_back(t0);
  res.trajectory.states.push_back(u0);

  const auto& ctl = cfg.controller;
  double t = t0;
  Vector u = u0;
  double h = std::clamp(cfg.h0, ctl.h_min, ctl.h_max);
  std::optional<FsalStage> fsal;
  std::size_t next_out = 0;

  while (t < t_end) {
    const double target = outputs[next_out];
    // Stretch by a hair rather than leave a sliver step before the target.
    const double remaining = target - t;
    const double h_try = h >= remaining * (1.0 - 1e-10) ? remaining : h;
    MacroStepResult r = macro_step(p, t, u, h_try, cfg, fsal, res.trace);
    const bool landed = r.h_used == h_try && h_try == target - t;
    res.trajectory.last_interval_start = t;
    t = landed ? target : t + r.h_used;
    u = std::move(r.u_next);
    if (landed) {
      ++next_out;
      res.trajectory.times.push_back(t);
      res.trajectory.states.push_back(u);
    } else if (cfg.record_every_step) {
      res.trajectory.times.push_back(t);
      res.trajectory.states.push_back(u);
    }
    h = r.h_proposed;
    fsal = std::move(r.fsal);
    res.trajectory.last_interval = std::move(r.tentative);
  }
  return res;
}

IntegrationResult integrate_single_rate(const OdeProblem& p, double t0, double t_end, const Vector& u0,
                                        const MultirateConfig& cfg) {
  MultirateConfig single = cfg;
  single.controller.delta = 1.0;
  return integrate(p, t0, t_end, u0, single);
}

IntegrationResult integrate_fixed_step(const OdeProblem& p, double t0, double t_end, const Vector& u0, double h,
                                       const NewtonConfig& newton) {
  if (!(h > 0.0) || !(t_end > t0)) throw Error(ErrorCode::InvalidArgument, "integrate_fixed_step: bad interval or step");
  IntegrationResult res;
  res.trace.dimension = p.dimension;
  res.trajectory.times.push_back(t0);
  res.trajectory.states.push_back(u0);
  const Subsystem whole = Subsystem::whole(p);
  double t = t0;
  Vector u = u0;
  std::optional<Vector> z;
  const auto n_steps = static_cast<std::int64_t>(std::ceil((t_end - t0) / h - 1e-9));
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const double t_next = (k + 1 == n_steps) ? t_end : t0 + static_cast<double>(k + 1) * h;
    const double hk = t_next - t;
    if (z && hk != h) *z *= hk / h;
    StepResult r = step(whole, t, u, hk, z, newton, &res.trace.stats);
    StepRecord rec = make_record(k, 0, t, hk, r, 0.0);
    rec.all_components = true;
    res.trace.steps.push_back(std::move(rec));
    res.trace.macro_steps.push_back(MacroRecord{t, hk, 0, 0, 0.0, 0});
    ++res.trace.accepted_steps;
    res.trajectory.last_interval = HermiteData::from_step(u, r, hk);
    res.trajectory.last_interval_start = t;
    u = r.u_next;
    z = r.z_next;
    t = t_next;
    res.trajectory.times.push_back(t);
    res.trajectory.states.push_back(u);
  }
  return res;
}

}  // namespace mrtr

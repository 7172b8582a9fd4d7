#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrtr/benchmarks.hpp"
#include "mrtr/stability.hpp"

namespace mrtr::cli {

using Json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string compress_indices(const std::vector<long>& idx) {
  std::string out;
  for (std::size_t k = 0; k < idx.size();) {
    std::size_t e = k;
    while (e + 1 < idx.size() && idx[e + 1] == idx[e] + 1) ++e;
    if (!out.empty()) out += ' ';
    out += std::to_string(idx[k]);
    if (e > k) out += '-' + std::to_string(idx[e]);
    k = e + 1;
  }
  return out;
}

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_integration_failure(ErrorCode c) {
  switch (c) {
    case ErrorCode::StepFloorReached:
    case ErrorCode::NewtonDivergence:
    case ErrorCode::TooManyRejections:
    case ErrorCode::SafetyCapExceeded:
    case ErrorCode::NonFiniteOutput:
    case ErrorCode::SingularMatrix:
    case ErrorCode::NonConvergence:
      return true;
    default:
      return false;
  }
}

// Collects output files and reports the first write failure.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::ios_base::failure("cannot create " + dir_.string() + ": " + ec.message());
  }

  template <typename Fn>
  void write(const std::string& name, Fn&& body) {
    const auto path = dir_ / name;
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot open " + path.string());
    body(out);
    out.close();
    if (!out) throw std::ios_base::failure("write failed: " + path.string());
    files_.push_back(name);
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

BenchmarkPreset build_preset(const Options& o) {
  PresetOptions p;
  if (o.cells) {
    if (*o.cells < 1) throw ConfigError("--cells/--m must be positive");
    p.size = static_cast<Index>(*o.cells);
  }
  p.t_end = o.t_end;
  p.u_l = o.u_l;
  p.u_r = o.u_r;
  p.sigma = o.sigma;
  BenchmarkPreset b = make_preset(o.preset, p);

  MultirateConfig& c = b.config;
  if (o.tol_rel) c.tolerances.tau_r = *o.tol_rel;
  if (o.tol_abs) c.tolerances.tau_a = *o.tol_abs;
  c.controller.delta = o.delta;
  c.controller.nu = o.nu;
  if (o.h0) c.h0 = *o.h0;
  if (o.h_max) c.controller.h_max = *o.h_max;
  c.interpolant = interpolant_from_string(o.interp);
  c.output_times = o.output_times.empty() ? b.report_times : o.output_times;
  c.record_every_step = o.every_step;
  if (o.mode != "single" && o.mode != "multi") throw ConfigError("--mode must be single or multi");
  c.validate();
  return b;
}

IntegrationResult run_mode(const BenchmarkPreset& b, const MultirateConfig& cfg, const std::string& mode) {
  if (mode == "single") return integrate_single_rate(b.problem, b.t0, b.t_end, b.u0, cfg);
  return integrate(b.problem, b.t0, b.t_end, b.u0, cfg);
}

Json config_json(const BenchmarkPreset& b, const MultirateConfig& c, const std::string& mode) {
  Json params = Json::object();
  for (const auto& [k, v] : b.parameters) params[k] = v;
  return Json{{"preset", b.name},
              {"mode", mode},
              {"tol_rel", c.tolerances.tau_r},
              {"tol_abs", c.tolerances.tau_a},
              {"delta", mode == "single" ? 1.0 : c.controller.delta},
              {"nu", c.controller.nu},
              {"h0", c.h0},
              {"h_max", std::isfinite(c.controller.h_max) ? Json(c.controller.h_max) : Json("inf")},
              {"interpolant", to_string(c.interpolant)},
              {"newton_tolerance", c.newton.tolerance},
              {"t0", b.t0},
              {"t_end", b.t_end},
              {"preset_parameters", params}};
}

Json spatial_json(const BenchmarkPreset& b) {
  if (!b.spatial) return nullptr;
  return Json{{"dx", b.spatial->dx},
              {"cells", b.spatial->centers.size()},
              {"x_first", b.spatial->centers.front()},
              {"x_last", b.spatial->centers.back()}};
}

void write_trajectory(std::ostream& out, const Trajectory& tr) {
  const Index m = tr.states.front().size();
  out << "t";
  for (Index i = 0; i < m; ++i) out << ",y" << i;
  out << '\n';
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    out << fmt(tr.times[k]);
    for (Index i = 0; i < m; ++i) out << ',' << fmt(tr.states[k](i));
    out << '\n';
  }
}

void write_trace(std::ostream& out, const IntegrationTrace& tr) {
  out << "step,macro_index,level,t_start,h,components,eta_max,newton_iterations,probe\n";
  for (std::size_t k = 0; k < tr.steps.size(); ++k) {
    const StepRecord& s = tr.steps[k];
    out << k << ',' << s.macro_index << ',' << s.level << ',' << fmt(s.t_start) << ',' << fmt(s.h) << ','
        << tr.components_in(s) << ',' << fmt(s.eta_max) << ',' << s.newton_iterations << ',' << fmt(s.probe) << '\n';
  }
}

void write_spacetime(std::ostream& out, const IntegrationTrace& tr) {
  out << "step,level,t_start,t_end,count,indices\n";
  std::vector<long> all(static_cast<std::size_t>(tr.dimension));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<long>(i);
  for (std::size_t k = 0; k < tr.steps.size(); ++k) {
    const StepRecord& s = tr.steps[k];
    const std::vector<long> idx = s.all_components ? all : std::vector<long>(s.components.begin(), s.components.end());
    out << k << ',' << s.level << ',' << fmt(s.t_start) << ',' << fmt(s.t_start + s.h) << ',' << idx.size() << ','
        << compress_indices(idx) << '\n';
  }
}

void write_courant(std::ostream& out, const std::vector<CourantSample>& cs) {
  out << "step,macro_index,level,t,h,courant,global\n";
  for (const auto& c : cs)
    out << c.step << ',' << c.macro_index << ',' << c.level << ',' << fmt(c.t) << ',' << fmt(c.h) << ','
        << fmt(c.courant) << ',' << (c.global ? 1 : 0) << '\n';
}

void write_errors(std::ostream& out, const std::vector<ErrorRow>& rows) {
  out << "t,rel_error_exact,rel_error_reference\n";
  for (const auto& r : rows) out << fmt(r.t) << ',' << fmt(r.vs_exact) << ',' << fmt(r.vs_reference) << '\n';
}

Json metrics_json(const IntegrationResult& r, double wall) {
  return Json{{"accepted_steps", r.trace.accepted_steps},
              {"rejected_steps", r.trace.rejected_steps},
              {"macro_steps", r.trace.macro_steps.size()},
              {"workload", workload(r.trace)},
              {"scalar_evals", r.trace.stats.scalar_evals},
              {"rhs_calls", r.trace.stats.rhs_calls},
              {"jacobian_evals", r.trace.stats.jacobian_evals},
              {"wall_time_s", wall}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr const char* kDeterminism =
    "no random numbers are used; identical flags reproduce every CSV bit for bit (wall time excepted)";

}  // namespace

int cmd_run(const Options& o, const std::string& command_line) {
  const BenchmarkPreset b = build_preset(o);
  const auto t0 = std::chrono::steady_clock::now();
  const IntegrationResult r = run_mode(b, b.config, o.mode);
  const double wall = seconds_since(t0);

  ArtifactWriter w(o.out_dir);
  w.write("trajectory.csv", [&](std::ostream& out) { write_trajectory(out, r.trajectory); });
  w.write("trace.csv", [&](std::ostream& out) { write_trace(out, r.trace); });
  w.write("spacetime.csv", [&](std::ostream& out) { write_spacetime(out, r.trace); });
  if (b.spatial && b.spatial->flux_derivative) {
    const auto cs = courant_numbers(r.trace, b);
    w.write("courant.csv", [&](std::ostream& out) { write_courant(out, cs); });
  }
  Json errors = nullptr;
  if (o.errors) {
    std::vector<double> times;
    for (const double t : b.config.output_times)
      if (t > b.t0 && t <= b.t_end) times.push_back(t);
    const auto ref = reference_solution(b, times);
    const auto rows = error_table(r.trajectory, b, times, ref);
    w.write("errors.csv", [&](std::ostream& out) { write_errors(out, rows); });
    errors = Json::array();
    for (const auto& row : rows)
      errors.push_back({{"t", row.t}, {"vs_exact", std::isnan(row.vs_exact) ? Json() : Json(row.vs_exact)},
                        {"vs_reference", row.vs_reference}});
  }
  Json files = w.files();
  files.push_back("summary.json");
  const Json summary{{"command", "run"},
                     {"command_line", command_line},
                     {"config", config_json(b, b.config, o.mode)},
                     {"spatial", spatial_json(b)},
                     {"determinism", kDeterminism},
                     {"outputs", files},
                     {"metrics", metrics_json(r, wall)},
                     {"errors", errors}};
  w.write("summary.json", [&](std::ostream& out) { out << summary.dump(2) << '\n'; });
  std::cout << "run " << b.name << " (" << o.mode << "): " << r.trace.accepted_steps << " accepted, "
            << r.trace.rejected_steps << " rejected, workload " << workload(r.trace) << '\n';
  return kOk;
}

namespace {

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read matrix file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw ConfigError("matrix file: bad number in '" + line + "'");
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("matrix file is empty");
  Matrix a(static_cast<Index>(rows.size()), static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw ConfigError("matrix file: matrix must be square");
    for (std::size_t j = 0; j < rows.size(); ++j) a(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return a;
}

ActivePartition parse_active(const std::string& spec, Index m, const std::optional<ActivePartition>& fallback) {
  if (spec == "default") {
    if (!fallback) throw ConfigError("--active is required with --matrix");
    return *fallback;
  }
  if (spec == "all") return ActivePartition::full(m);
  if (spec == "none") return ActivePartition::none(m);
  std::vector<Index> idx;
  std::istringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size()) throw ConfigError("");
      idx.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw ConfigError("--active: bad index '" + tok + "'");
    }
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return ActivePartition(std::move(idx), m);
}

}  // namespace

int cmd_stability(const Options& o, const std::string& command_line) {
  Matrix a;
  std::optional<ActivePartition> fallback;
  std::string label;
  if (!o.matrix_file.empty()) {
    a = read_matrix(o.matrix_file);
    label = o.matrix_file;
  } else {
    ModelSystem s = model_system(o.system);
    a = s.a;
    fallback = s.active;
    label = s.name;
  }
  const ActivePartition active = parse_active(o.active, a.rows(), fallback);
  std::vector<InterpolantKind> kinds;
  if (o.kind == "both") kinds = {InterpolantKind::linear, InterpolantKind::hermite};
  else kinds = {interpolant_from_string(o.kind)};
  if (o.points < 2) throw ConfigError("--points must be >= 2");
  const auto grid = log_grid(o.rescaled_min, o.rescaled_max, o.points);

  AmplificationReport rep = norm_sweep(a, active, kinds, grid);
  rep.system = label;

  ArtifactWriter w(o.out_dir);
  w.write("amplification.csv", [&](std::ostream& out) { rep.write_csv(out); });
  Json files = w.files();
  files.push_back("summary.json");
  double max_rho = 0.0, max_norm2 = 0.0;
  for (const auto& row : rep.rows) {
    max_rho = std::max(max_rho, row.spectral_radius);
    max_norm2 = std::max(max_norm2, row.norm2);
  }
  const Json summary{{"command", "stability"},
                     {"command_line", command_line},
                     {"system", label},
                     {"dimension", a.rows()},
                     {"active", rep.active},
                     {"max_abs_eigenvalue", rep.max_abs_eigenvalue},
                     {"grid", {{"points", o.points}, {"rescaled_min", o.rescaled_min}, {"rescaled_max", o.rescaled_max}}},
                     {"determinism", kDeterminism},
                     {"outputs", files},
                     {"metrics", {{"max_spectral_radius", max_rho}, {"max_norm2", max_norm2}}}};
  w.write("summary.json", [&](std::ostream& out) { out << summary.dump(2) << '\n'; });
  std::cout << "stability " << label << ": " << rep.rows.size() << " rows, max spectral radius " << fmt(max_rho)
            << '\n';
  return kOk;
}

int cmd_compare(const Options& o, const std::string& command_line) {
  if (o.tolerances.empty()) throw ConfigError("compare needs at least one tolerance (--tols)");
  for (const auto& m : o.modes)
    if (m != "single" && m != "multi") throw ConfigError("--modes accepts single and multi");
  Options base_opt = o;
  base_opt.mode = "multi";
  const BenchmarkPreset b = build_preset(base_opt);
  const std::vector<double> final_time{b.t_end};
  const Vector ref = reference_solution(b, final_time).front();

  struct Row {
    double tol_abs, tol_rel;
    std::string mode;
    double err_abs, err_rel, err_exact;
    IntegrationResult r;
    double wall;
  };
  std::vector<Row> rows;
  const ToleranceSpec base = b.config.tolerances;
  for (const double tol : o.tolerances) {
    if (!(tol > 0.0)) throw ConfigError("tolerances must be positive");
    MultirateConfig cfg = b.config;
    cfg.tolerances.tau_a = tol;
    // keep the preset's relative/absolute ratio
    cfg.tolerances.tau_r = base.tau_a > 0.0 ? base.tau_r * tol / base.tau_a : base.tau_r;
    cfg.output_times.clear();
    for (const auto& mode : o.modes) {
      const auto t0 = std::chrono::steady_clock::now();
      IntegrationResult r = run_mode(b, cfg, mode);
      const double wall = seconds_since(t0);
      const Vector& u = r.trajectory.final_state();
      const double exact = b.exact ? relative_linf_error(u, b.exact(b.t_end)) : std::numeric_limits<double>::quiet_NaN();
      rows.push_back({tol, cfg.tolerances.tau_r, mode, (u - ref).cwiseAbs().maxCoeff(), relative_linf_error(u, ref),
                      exact, std::move(r), wall});
    }
  }

  ArtifactWriter w(o.out_dir);
  w.write("compare.csv", [&](std::ostream& out) {
    out << "tol_abs,tol_rel,mode,error_abs,error_rel,error_exact,workload,scalar_evals,accepted_steps,rejected_steps,"
           "macro_steps,wall_time_s\n";
    for (const auto& row : rows)
      out << fmt(row.tol_abs) << ',' << fmt(row.tol_rel) << ',' << row.mode << ',' << fmt(row.err_abs) << ','
          << fmt(row.err_rel) << ',' << fmt(row.err_exact) << ',' << workload(row.r.trace) << ','
          << row.r.trace.stats.scalar_evals << ',' << row.r.trace.accepted_steps << ',' << row.r.trace.rejected_steps
          << ',' << row.r.trace.macro_steps.size() << ',' << fmt(row.wall) << '\n';
  });
  Json files = w.files();
  files.push_back("summary.json");
  Json runs = Json::array();
  for (const auto& row : rows)
    runs.push_back({{"tol_abs", row.tol_abs}, {"mode", row.mode}, {"error_abs", row.err_abs},
                    {"metrics", metrics_json(row.r, row.wall)}});
  const Json summary{{"command", "compare"},
                     {"command_line", command_line},
                     {"config", config_json(b, b.config, "multi")},
                     {"reference", b.reference == ReferenceKind::explicit_pair ? "dormand_prince_5_4" : "tight_trbdf2"},
                     {"determinism", kDeterminism},
                     {"outputs", files},
                     {"runs", runs}};
  w.write("summary.json", [&](std::ostream& out) { out << summary.dump(2) << '\n'; });
  std::cout << "compare " << b.name << ": " << rows.size() << " runs\n";
  return kOk;
}

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Self-adjusting multirate TR-BDF2: benchmark runs and stability sweeps"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value file with option values");

  app.add_option("--preset", o.preset, "benchmark preset (aliases advection, burgers_riemann)")->capture_default_str();
  app.add_option("--mode", o.mode, "single or multi")->check(CLI::IsMember({"single", "multi"}))->capture_default_str();
  app.add_option("--tol-rel", o.tol_rel, "relative tolerance");
  app.add_option("--tol-abs", o.tol_abs, "absolute tolerance");
  app.add_option("--delta", o.delta, "partition threshold relative to max eta")->capture_default_str();
  app.add_option("--nu", o.nu, "step size safety factor")->capture_default_str();
  app.add_option("--h0", o.h0, "initial macro step");
  app.add_option("--h-max", o.h_max, "largest macro step");
  app.add_option("--interp", o.interp, "latent interpolant")
      ->check(CLI::IsMember({"linear", "hermite", "cubic"}))
      ->capture_default_str();
  app.add_option("--t-end", o.t_end, "final time");
  app.add_option("--cells,--m", o.cells, "cells, or inverters for the chain");
  app.add_option("--ul", o.u_l, "Burgers left state");
  app.add_option("--ur", o.u_r, "Burgers right state");
  app.add_option("--sigma", o.sigma, "advection Gaussian width");
  app.add_option("--out-dir", o.out_dir, "artifact directory")->capture_default_str();
  app.add_option("--output-times", o.output_times, "times stored in trajectory.csv")->delimiter(',');
  app.add_flag("--every-step", o.every_step, "store the state after every macro step");
  app.add_flag("--errors", o.errors, "write errors.csv against exact and reference solutions");
  app.add_option("--system", o.system, "model system")->check(CLI::IsMember(model_system_names()))->capture_default_str();
  app.add_option("--matrix", o.matrix_file, "square matrix file, one row per line");
  app.add_option("--active", o.active, "default, all, none or comma-separated indices")->capture_default_str();
  app.add_option("--kind", o.kind, "linear, hermite or both")
      ->check(CLI::IsMember({"linear", "hermite", "cubic", "both"}))
      ->capture_default_str();
  app.add_option("--points", o.points, "grid points")->capture_default_str();
  app.add_option("--rescaled-min", o.rescaled_min, "smallest h max|lambda|")->capture_default_str();
  app.add_option("--rescaled-max", o.rescaled_max, "largest h max|lambda|")->capture_default_str();
  app.add_option("--tols", o.tolerances, "absolute tolerances, comma separated")->delimiter(',');
  app.add_option("--modes", o.modes, "modes to compare")->delimiter(',')->capture_default_str();

  auto* run = app.add_subcommand("run", "integrate a preset and write trajectory, trace and diagnostics");
  auto* stab = app.add_subcommand("stability", "sweep multirate amplification-matrix norms");
  auto* cmp = app.add_subcommand("compare", "single vs multirate over a tolerance list");
  for (auto* s : {run, stab, cmp}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  std::string command_line;
  for (int i = 0; i < argc; ++i) command_line += (i ? " " : "") + std::string(argv[i]);

  try {
    if (run->parsed()) return cmd_run(o, command_line);
    if (stab->parsed()) return cmd_stability(o, command_line);
    return cmd_compare(o, command_line);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return is_integration_failure(e.code()) ? kIntegrationFailure : kConfigError;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace mrtr::cli

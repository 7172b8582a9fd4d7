#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mrtr::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kConfigError = 2,
  kIntegrationFailure = 3,
};

/// Flags shared by the subcommands; unset optionals keep preset defaults.
struct Options {
  std::string preset = "inverter_chain";
  std::string mode = "multi";
  std::optional<double> tol_rel, tol_abs;
  double delta = 0.1;
  double nu = 0.9;
  std::optional<double> h0, h_max;
  std::string interp = "hermite";
  std::optional<double> t_end;
  std::optional<long> cells;
  std::optional<double> u_l, u_r, sigma;
  std::filesystem::path out_dir = ".";
  bool every_step = false;
  bool errors = false;
  std::vector<double> output_times;

  // stability
  std::string system = "sys1";
  std::string matrix_file;
  std::string active = "default";
  std::string kind = "both";
  int points = 60;
  double rescaled_min = 1e-3, rescaled_max = 100.0;

  // compare
  std::vector<double> tolerances;
  std::vector<std::string> modes{"single", "multi"};
};

int cmd_run(const Options& opt, const std::string& command_line);
int cmd_stability(const Options& opt, const std::string& command_line);
int cmd_compare(const Options& opt, const std::string& command_line);

/// Parses argv and dispatches; returns the process exit status.
int main(int argc, char** argv);

/// "%.17g"
std::string fmt(double v);

/// "0-3 7 9-10" style listing of sorted indices.
std::string compress_indices(const std::vector<long>& idx);

}  // namespace mrtr::cli

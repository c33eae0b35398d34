#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace msgn {

// Resolved experiment configuration. Parsed from a line-oriented
// `key = value` file; unknown keys are rejected. CLI flags override the
// file's seed / out / workers.
struct ExperimentConfig {
  std::string command;  // simulate | pdmp | converge | clt | validate
  std::string network_path;

  std::vector<double> x0;
  std::vector<long long> y0;
  std::vector<double> x0n;       // optional; defaults to x0
  std::vector<long long> y0n;    // optional; defaults to y0
  bool has_z0n = false;

  double T = 1.0;
  long long N = 0;
  std::vector<long long> n_list;
  int M = 100;
  int M_sde = 1000;
  int batches = 1;
  uint64_t seed = 0;
  int grid = 256;          // grid intervals for path sampling
  int sde_steps = 4096;
  int workers = 0;         // 0 = all cores
  double ode_rtol = 1e-8;
  double ode_atol = 1e-10;
  long long event_cap = 10'000'000;
  double lambda0 = 1.0;
  uint32_t replica = 0;
  bool emit_plot = false;
  std::string out_dir = ".";

  // validation box for the `validate` command
  double val_x_max = 10.0;
  long long val_y_max = 1;
  int val_samples = 1000;
};

// Throws parse_error on malformed or unknown keys / invalid values.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

struct CliOverrides {
  std::optional<uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
};

// Validates the config for `command`, runs it, writes output files into
// config.out_dir, and returns a process exit code:
//   0 success, 2 config error, 3 network error, 4 simulation/integrator
//   failure, 5 I/O error.
// Messages go to `log` (one line per event, prefixed by category).
int run_experiment(ExperimentConfig config, const std::string& command,
                   const CliOverrides& overrides, std::ostream& log);

}  // namespace msgn

// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ictm/app/image_io.hpp"
#include "ictm/fidelity.hpp"
#include "ictm/grid.hpp"
#include "ictm/solver.hpp"

namespace ictm::app {

// Initial partition recipe. Kinds: circles, checkerboard, stripes, random,
// file. Sizes for checkerboard/stripes are in pixels; circle radii are in
// physical units of the [-pi, pi] domain.
struct InitSpec {
  std::string kind = "checkerboard";
  int block = 8;
  int stripe = 8;
  int count = 1;
  double radius = 1.0;
  std::filesystem::path file;
};

// One segmentation run. Keys in the config file use the model's symbol
// names: tau, lambda, sigma, rho, mu, omega, epsilon, nu_floor.
struct RunConfig {
  std::filesystem::path input;
  std::string model = "cv";
  int phases = 2;
  double tau = 0.01;
  double lambda = 0.05;
  double sigma = 3.0;
  double rho = 15.0;
  std::vector<double> mu{1.0};
  double omega = 0.5;
  double epsilon = kDefaultLifEpsilon;
  double nu_floor = kDefaultNuFloor;
  InitSpec init;
  bool normalize = false;
  std::filesystem::path output = "ictm_out";
  bool energy_check = false;
  std::optional<std::filesystem::path> ground_truth;
  std::uint64_t seed = 0;
  int max_iters = 1000;
  std::size_t tol_pixels = 0;
  Boundary boundary = Boundary::periodic;
  // Write measured per-iteration times into the trace CSV. Off by default so
  // repeated runs produce byte-identical outputs; timings always go to the
  // timing.log sidecar.
  bool trace_timing = false;

  SolverParams solver_params() const;
  FidelityModel make_model(const GridSpec& grid) const;
};

// Applies one key = value setting. Throws UserError for unknown keys or
// malformed values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

// Parses "key = value" lines; '#' starts a comment, values may be quoted.
// Relative paths are resolved against base_dir.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

// Reads a config file, then applies "key=value" overrides in order.
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

// Deterministic given the seed. Throws UserError for an unknown kind.
LabelField initialize(const InitSpec& spec, const GridSpec& grid, int num_phases,
                      std::uint64_t seed);

struct Synthetic {
  ScalarField image;
  LabelField truth;
};

// Star on a darker background, optionally under a smooth multiplicative bias
// field b and additive Gaussian noise: f = b * I + noise.
struct StarParams {
  int size = 128;
  int arms = 5;
  double radius = 1.7;       // mean star radius, physical units
  double amplitude = 0.35;   // relative arm depth
  double foreground = 0.7;
  double background = 0.3;
  double bias = 0.0;         // b ranges over [1 - bias, 1 + bias]
  double noise = 0.0;        // std-dev of the additive noise
  std::uint64_t seed = 0;
};

// Two intensity levels split into left/right halves ("split") or a centred
// disk ("disk"), with optional noise.
struct TwoLevelParams {
  int width = 64;
  int height = 64;
  double low = 0.0;
  double high = 1.0;
  std::string shape = "disk";
  double radius = 1.5;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

// Smooth low-frequency field with values in [1 - strength, 1 + strength].
ScalarField bias_field(const GridSpec& grid, double strength);

Synthetic synth_star(const StarParams& params);
Synthetic synth_two_level(const TwoLevelParams& params);

// Strength of level i out of count, evenly spaced on [0, max_strength].
double bias_level(int level, int count, double max_strength);

// Writes image.png and truth.png into dir.
void write_synthetic(const std::filesystem::path& dir, const Synthetic& data);

enum ExitCode : int { kConverged = 0, kError = 1, kIterationCap = 2 };

// Runs one configured segmentation and writes labels.png, overlay.png,
// trace.csv, metrics.json and timing.log into config.output.
int run(const RunConfig& config);

// CSV of a trace (header included). Energies are left blank when the run
// did not audit them.
std::string trace_csv(const SolverTrace& trace, bool with_timing);

}  // namespace ictm::app

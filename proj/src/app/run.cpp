// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "ictm/app/app.hpp"
#include "ictm/error.hpp"
#include "ictm/metrics.hpp"

namespace ictm::app {
namespace {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot create " + path.string());
  out << text;
}

std::string timing_log(const SolverTrace& trace, double total_ms) {
  std::ostringstream out;
  const std::time_t now = std::time(nullptr);
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << "finished " << stamp << "\n";
  out << "total_ms " << total_ms << "\n";
  for (const IterationRecord& r : trace.records) out << "iter " << r.iteration << " ms " << r.millis << "\n";
  return out.str();
}

}  // namespace

std::string trace_csv(const SolverTrace& trace, bool with_timing) {
  std::ostringstream out;
  out << "iter,e_total,e_fidelity,e_regularizer,changed_pixels,millis\n";
  for (const IterationRecord& r : trace.records) {
    out << r.iteration << ',';
    if (trace.energy_checked) {
      out << format_double(r.energy.total) << ',' << format_double(r.energy.fidelity) << ','
          << format_double(r.energy.regularizer) << ',';
    } else {
      out << ",,,";
    }
    out << r.changed_pixels << ',';
    if (with_timing) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3f", r.millis);
      out << buf;
    } else {
      out << 0;
    }
    out << '\n';
  }
  return out.str();
}

int run(const RunConfig& config) {
  try {
    const auto start = std::chrono::steady_clock::now();
    const ScalarField image = load_image(config.input, config.normalize);
    const GridSpec& grid = image.grid();
    const FidelityModel model = config.make_model(grid);
    const SolverParams params = config.solver_params();
    const LabelField initial = initialize(config.init, grid, config.phases, config.seed);

    std::optional<LabelField> truth;
    if (config.ground_truth) {
      truth = load_label_map(*config.ground_truth, config.phases);
      if (!(truth->grid() == grid)) {
        throw UserError("ground truth " + config.ground_truth->string() +
                        " does not match the image size");
      }
    }

    const SolveResult result = solve(model, image, initial, params);
    const auto heat = default_kernel_cache().get({HeatKernel{params.tau}, grid, params.boundary});
    const EnergyParts final_energy = total_energy(result.model, image, result.labels, params, *heat);

    fs::create_directories(config.output);
    save_label_map(config.output / "labels.png", result.labels);
    save_overlay(config.output / "overlay.png", image, result.labels);
    write_text(config.output / "trace.csv", trace_csv(result.trace, config.trace_timing));

    nlohmann::ordered_json metrics;
    metrics["model"] = std::string(model.name());
    metrics["n_phases"] = config.phases;
    metrics["iterations"] = result.trace.records.size();
    metrics["converged"] = result.trace.converged;
    metrics["final_energy"] = final_energy.total;
    if (truth) {
      const SegScore score = jaccard(result.labels, *truth);
      metrics["jaccard_per_phase"] = score.per_phase;
      metrics["jaccard_mean"] = score.mean;
    } else {
      metrics["jaccard_per_phase"] = nullptr;
      metrics["jaccard_mean"] = nullptr;
    }
    metrics["collapsed"] = result.trace.collapsed;
    write_text(config.output / "metrics.json", metrics.dump(2) + "\n");

    const double total_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    write_text(config.output / "timing.log", timing_log(result.trace, total_ms));

    if (result.trace.collapsed) {
      std::cerr << "note: all pixels ended in a single phase\n";
    }
    return result.trace.converged ? kConverged : kIterationCap;
  } catch (const InvariantViolation& e) {
    std::cerr << "error: solver invariant violated: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kError;
}

}  // namespace ictm::app

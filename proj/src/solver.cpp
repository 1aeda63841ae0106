// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include "ictm/solver.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ictm/error.hpp"
#include "ictm/simd.hpp"

namespace ictm {
namespace {

void check_heat(const ConvOperator& heat, const GridSpec& grid, const SolverParams& p) {
  const auto* kind = std::get_if<HeatKernel>(&heat.spec().kind);
  if (kind == nullptr || kind->tau != p.tau) {
    throw std::invalid_argument("heat operator must be a heat kernel built with the solver's tau");
  }
  if (!(heat.grid() == grid)) {
    throw std::invalid_argument("heat operator grid does not match the label grid");
  }
}

double perimeter_weight(const SolverParams& p) { return p.lambda * std::sqrt(std::numbers::pi / p.tau); }

// G_tau * (1 - u_i) for every phase.
std::vector<ScalarField> diffuse_complements(const LabelField& labels, const ConvOperator& heat) {
  std::vector<ScalarField> out;
  out.reserve(labels.num_phases());
  const auto src = labels.labels();
  for (int i = 0; i < labels.num_phases(); ++i) {
    std::vector<double> complement(labels.size());
    for (std::size_t k = 0; k < complement.size(); ++k) complement[k] = src[k] == i ? 0.0 : 1.0;
    out.push_back(convolve(heat, ScalarField(labels.grid(), std::move(complement))));
  }
  return out;
}

double masked_total(const std::vector<ScalarField>& fields, const LabelField& labels) {
  const auto& kt = simd::active_kernels();
  double total = 0.0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    total += kt.masked_sum(fields[i].values().data(), labels.labels().data(),
                           static_cast<std::uint8_t>(i), labels.size());
  }
  return total * labels.grid().pixel_area();
}

// Everything one iteration needs about the state (u, Theta): the potentials
// and the diffused complements serve both the energy audit and phi.
struct Evaluation {
  std::vector<ScalarField> potentials;
  std::vector<ScalarField> diffused;

  EnergyParts energy(const LabelField& labels, const SolverParams& p) const {
    EnergyParts e;
    e.fidelity = fidelity_energy(potentials, labels);
    e.regularizer = p.lambda == 0.0 ? 0.0 : perimeter_weight(p) * masked_total(diffused, labels);
    e.total = e.fidelity + e.regularizer;
    return e;
  }

  PhiField phi(const SolverParams& p) const {
    const double weight = 2.0 * perimeter_weight(p);
    const auto& kt = simd::active_kernels();
    PhiField out;
    out.reserve(potentials.size());
    for (std::size_t i = 0; i < potentials.size(); ++i) {
      std::vector<double> v(potentials[i].size());
      kt.add_scaled(v.data(), potentials[i].values().data(), diffused[i].values().data(), weight,
                    v.size());
      out.emplace_back(potentials[i].grid(), std::move(v));
    }
    return out;
  }
};

Evaluation evaluate(const FidelityModel& model, const ScalarField& image, const LabelField& labels,
                    const ConvOperator& heat) {
  return {potentials(model, image), diffuse_complements(labels, heat)};
}

int count_empty(const LabelField& labels) {
  int empty = 0;
  for (std::size_t c : labels.phase_counts()) empty += c == 0;
  return empty;
}

}  // namespace

void SolverParams::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be nonnegative");
  }
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
}

PhiField compute_phi(const FidelityModel& model, const ScalarField& image,
                     const LabelField& labels, const SolverParams& p, const ConvOperator& heat) {
  p.validate();
  check_heat(heat, labels.grid(), p);
  if (!(image.grid() == labels.grid())) {
    throw std::invalid_argument("compute_phi: image and label grids differ");
  }
  if (model.num_phases() != labels.num_phases()) {
    throw std::invalid_argument("compute_phi: model and label phase counts differ");
  }
  return evaluate(model, image, labels, heat).phi(p);
}

LabelField threshold(const PhiField& phi) {
  if (phi.size() < 2) throw std::invalid_argument("threshold needs at least two phases");
  const GridSpec& grid = phi.front().grid();
  std::vector<const double*> rows;
  rows.reserve(phi.size());
  for (const ScalarField& field : phi) {
    if (!(field.grid() == grid)) throw std::invalid_argument("threshold: phi grids differ");
    rows.push_back(field.values().data());
  }
  std::vector<std::uint8_t> labels(grid.pixel_count());
  simd::active_kernels().argmin_labels(rows.data(), static_cast<int>(phi.size()), labels.size(),
                                       labels.data());
  return LabelField(grid, static_cast<int>(phi.size()), std::move(labels));
}

double regularizer_energy(const LabelField& labels, const SolverParams& p,
                          const ConvOperator& heat) {
  p.validate();
  check_heat(heat, labels.grid(), p);
  if (p.lambda == 0.0) return 0.0;
  return perimeter_weight(p) * masked_total(diffuse_complements(labels, heat), labels);
}

SolveResult solve(const FidelityModel& initial_model, const ScalarField& image,
                  const LabelField& initial_labels, const SolverParams& p) {
  p.validate();
  if (!(image.grid() == initial_labels.grid())) {
    throw std::invalid_argument("solve: image and label grids differ");
  }
  const auto heat = default_kernel_cache().get({HeatKernel{p.tau}, image.grid(), p.boundary});

  using Clock = std::chrono::steady_clock;
  LabelField labels = initial_labels;
  FidelityModel model = update_theta(initial_model, image, labels);
  Evaluation eval = evaluate(model, image, labels, *heat);

  SolverTrace trace;
  trace.energy_checked = p.energy_check;
  EnergyParts previous;
  if (p.energy_check) {
    previous = eval.energy(labels, p);
    trace.initial_energy = previous;
  }

  for (int k = 1; k <= p.max_iters; ++k) {
    const auto start = Clock::now();
    LabelField next = threshold(eval.phi(p));
    const std::size_t changed = changed_pixels(labels, next);
    labels = std::move(next);
    model = update_theta(model, image, labels);
    eval = evaluate(model, image, labels, *heat);

    IterationRecord record;
    record.iteration = k;
    record.changed_pixels = changed;
    record.empty_phases = count_empty(labels);
    if (p.energy_check) {
      record.energy = eval.energy(labels, p);
      const double slack = kEnergySlack * (1.0 + std::abs(previous.total));
      if (record.energy.total > previous.total + slack) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "energy increased at iteration " << k << " (" << model.name()
            << "): " << previous.total << " -> " << record.energy.total << " [fidelity "
            << previous.fidelity << " -> " << record.energy.fidelity << ", regularizer "
            << previous.regularizer << " -> " << record.energy.regularizer << "]";
        throw InvariantViolation(msg.str());
      }
      previous = record.energy;
    }
    record.millis = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    trace.records.push_back(record);

    if (changed <= p.tol_pixels) {
      trace.converged = true;
      break;
    }
  }
  trace.collapsed = count_empty(labels) == labels.num_phases() - 1;
  return {std::move(labels), std::move(model), std::move(trace)};
}

}  // namespace ictm

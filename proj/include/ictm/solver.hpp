// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "ictm/fidelity.hpp"
#include "ictm/grid.hpp"
#include "ictm/kernel.hpp"

namespace ictm {

struct SolverParams {
  double tau = 0.01;      // heat-kernel time
  double lambda = 1.0;    // perimeter weight
  int max_iters = 1000;
  std::size_t tol_pixels = 0;
  bool energy_check = true;
  Boundary boundary = Boundary::periodic;

  // Throws std::invalid_argument unless tau > 0, lambda >= 0, max_iters >= 1.
  void validate() const;
};

struct EnergyParts {
  double total = 0.0;
  double fidelity = 0.0;
  double regularizer = 0.0;
};

struct IterationRecord {
  int iteration = 0;
  EnergyParts energy;  // zero unless energy_check is on
  std::size_t changed_pixels = 0;
  int empty_phases = 0;
  double millis = 0.0;
};

struct SolverTrace {
  EnergyParts initial_energy;  // E(u^0, Theta^0)
  std::vector<IterationRecord> records;
  bool energy_checked = false;
  bool converged = false;
  // Every pixel ended in one phase. A legitimate stationary state, reported
  // rather than treated as failure.
  bool collapsed = false;
};

// phi_i = F_i + 2 lambda sqrt(pi/tau) G_tau * (1 - u_i)
using PhiField = std::vector<ScalarField>;

// Throws std::invalid_argument if heat is not a HeatKernel with p.tau on the
// label grid.
PhiField compute_phi(const FidelityModel& model, const ScalarField& image,
                     const LabelField& labels, const SolverParams& p, const ConvOperator& heat);

// Pointwise argmin over phases, ties to the smallest index.
LabelField threshold(const PhiField& phi);

// lambda sqrt(pi/tau) sum_i sum_x u_i (G_tau * (1 - u_i)) dA
double regularizer_energy(const LabelField& labels, const SolverParams& p,
                          const ConvOperator& heat);

struct SolveResult {
  LabelField labels;
  FidelityModel model;
  SolverTrace trace;
};

// Alternates Theta updates and convolution-thresholding until at most
// p.tol_pixels pixels change or p.max_iters is reached. With p.energy_check
// the total energy is audited every iteration and an InvariantViolation is
// thrown if it grows by more than 1e-9 (1 + |E|).
SolveResult solve(const FidelityModel& initial_model, const ScalarField& image,
                  const LabelField& initial_labels, const SolverParams& p);

inline constexpr double kEnergySlack = 1e-9;

}  // namespace ictm

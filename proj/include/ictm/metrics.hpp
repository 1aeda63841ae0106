// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "ictm/fidelity.hpp"
#include "ictm/grid.hpp"
#include "ictm/kernel.hpp"
#include "ictm/solver.hpp"

namespace ictm {

struct SegScore {
  std::vector<double> per_phase;  // indexed by phase of the reference field
  double mean = 0.0;
  double pixel_accuracy = 0.0;
  std::vector<int> phase_map;  // predicted phase -> reference phase
  bool exhaustive = true;      // false when the greedy matcher was used
};

// Phases with more than this many labels are matched greedily.
inline constexpr int kExhaustiveMatchLimit = 6;

// Jaccard index |A ∩ B| / |A ∪ B| per phase between a prediction and a
// reference. phase_map[p] names the reference phase that predicted phase p
// corresponds to; without one, the permutation maximising the mean index is
// used. A phase empty in both fields scores 1.
SegScore jaccard(const LabelField& predicted, const LabelField& reference,
                 const std::optional<std::vector<int>>& phase_map = std::nullopt);

// sqrt(pi/tau) sum_x u_i (G_tau * (1 - u_i)) dA, in physical length units.
double perimeter_estimate(const LabelField& labels, int phase, double tau,
                          const ConvOperator& heat);

EnergyParts total_energy(const FidelityModel& model, const ScalarField& image,
                         const LabelField& labels, const SolverParams& p,
                         const ConvOperator& heat);

}  // namespace ictm

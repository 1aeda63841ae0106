// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include "ictm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ictm/simd.hpp"

namespace ictm {
namespace {

// confusion[p][r] = #pixels predicted p with reference r
using Confusion = std::vector<std::vector<std::size_t>>;

Confusion confusion_of(const LabelField& predicted, const LabelField& reference) {
  const int n = predicted.num_phases();
  Confusion m(n, std::vector<std::size_t>(n, 0));
  const auto a = predicted.labels();
  const auto b = reference.labels();
  for (std::size_t k = 0; k < a.size(); ++k) ++m[a[k]][b[k]];
  return m;
}

// Index of the reference phase r when predicted phase p maps onto it.
double pair_index(const Confusion& m, const std::vector<std::size_t>& pred_total,
                  const std::vector<std::size_t>& ref_total, int p, int r) {
  const std::size_t inter = m[p][r];
  const std::size_t uni = pred_total[p] + ref_total[r] - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

SegScore score_with(const Confusion& m, const std::vector<int>& map, std::size_t pixels) {
  const int n = static_cast<int>(m.size());
  std::vector<std::size_t> pred_total(n, 0), ref_total(n, 0);
  for (int p = 0; p < n; ++p) {
    for (int r = 0; r < n; ++r) {
      pred_total[p] += m[p][r];
      ref_total[r] += m[p][r];
    }
  }
  SegScore s;
  s.phase_map = map;
  s.per_phase.assign(n, 0.0);
  std::size_t agree = 0;
  for (int p = 0; p < n; ++p) {
    s.per_phase[map[p]] = pair_index(m, pred_total, ref_total, p, map[p]);
    agree += m[p][map[p]];
  }
  s.mean = std::accumulate(s.per_phase.begin(), s.per_phase.end(), 0.0) / n;
  s.pixel_accuracy = static_cast<double>(agree) / static_cast<double>(pixels);
  return s;
}

std::vector<int> greedy_map(const Confusion& m) {
  const int n = static_cast<int>(m.size());
  std::vector<std::size_t> pred_total(n, 0), ref_total(n, 0);
  for (int p = 0; p < n; ++p) {
    for (int r = 0; r < n; ++r) {
      pred_total[p] += m[p][r];
      ref_total[r] += m[p][r];
    }
  }
  struct Pair {
    double index;
    int p, r;
  };
  std::vector<Pair> pairs;
  for (int p = 0; p < n; ++p) {
    for (int r = 0; r < n; ++r) pairs.push_back({pair_index(m, pred_total, ref_total, p, r), p, r});
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.index > b.index; });
  std::vector<int> map(n, -1);
  std::vector<bool> taken(n, false);
  for (const Pair& pr : pairs) {
    if (map[pr.p] >= 0 || taken[pr.r]) continue;
    map[pr.p] = pr.r;
    taken[pr.r] = true;
  }
  return map;
}

}  // namespace

SegScore jaccard(const LabelField& predicted, const LabelField& reference,
                 const std::optional<std::vector<int>>& phase_map) {
  if (!(predicted.grid() == reference.grid()) ||
      predicted.num_phases() != reference.num_phases()) {
    throw std::invalid_argument("jaccard: label fields differ in grid or phase count");
  }
  const int n = predicted.num_phases();
  const Confusion m = confusion_of(predicted, reference);

  if (phase_map) {
    std::vector<int> sorted = *phase_map;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    if (sorted != identity) throw std::invalid_argument("jaccard: phase_map is not a permutation");
    return score_with(m, *phase_map, predicted.size());
  }

  if (n > kExhaustiveMatchLimit) {
    SegScore s = score_with(m, greedy_map(m), predicted.size());
    s.exhaustive = false;
    return s;
  }

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  SegScore best = score_with(m, perm, predicted.size());
  while (std::next_permutation(perm.begin(), perm.end())) {
    SegScore s = score_with(m, perm, predicted.size());
    if (s.mean > best.mean) best = std::move(s);
  }
  return best;
}

double perimeter_estimate(const LabelField& labels, int phase, double tau,
                          const ConvOperator& heat) {
  if (!(tau > 0.0)) throw std::invalid_argument("perimeter_estimate: tau must be positive");
  const auto* kind = std::get_if<HeatKernel>(&heat.spec().kind);
  if (kind == nullptr || kind->tau != tau || !(heat.grid() == labels.grid())) {
    throw std::invalid_argument("perimeter_estimate: heat operator does not match tau or grid");
  }
  const ScalarField u = indicator(labels, phase);
  std::vector<double> complement(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) complement[k] = 1.0 - u[k];
  const ScalarField diffused = convolve(heat, ScalarField(labels.grid(), std::move(complement)));
  const double overlap = simd::active_kernels().masked_sum(
      diffused.values().data(), labels.labels().data(), static_cast<std::uint8_t>(phase),
      labels.size());
  // Rounding in the transform can leave a tiny negative residue.
  return std::max(0.0, std::sqrt(std::numbers::pi / tau) * overlap * labels.grid().pixel_area());
}

EnergyParts total_energy(const FidelityModel& model, const ScalarField& image,
                         const LabelField& labels, const SolverParams& p,
                         const ConvOperator& heat) {
  EnergyParts e;
  e.fidelity = fidelity_energy(model, image, labels);
  e.regularizer = regularizer_energy(labels, p, heat);
  e.total = e.fidelity + e.regularizer;
  return e;
}

}  // namespace ictm

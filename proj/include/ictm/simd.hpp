// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Data-parallel inner loops of the solver. Every kernel has a portable scalar
// reference implementation and, where the target supports it, a vectorised
// variant (AVX2 on x86-64, NEON on aarch64). The variant is chosen once at
// start-up from CPUID; set ICTM_SIMD=scalar in the environment to force the
// reference path.
//
// Element-wise kernels produce bit-identical results on every path (no fused
// multiply-add, same operation order). Reductions accumulate in a different
// order and agree to rounding only.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace ictm::simd {

struct KernelTable {
  std::string_view name;

  // data[k] *= symbol[k] for complex data and real symbol.
  void (*scale_spectrum)(std::complex<double>* data, const double* symbol, std::size_t n);

  // out = a + s * b
  void (*add_scaled)(double* out, const double* a, const double* b, double s, std::size_t n);

  // out = (c - f)^2
  void (*squared_difference)(double* out, const double* f, double c, std::size_t n);

  // out = mu * (gc2 - 2 f gc + f^2 g1), the expanded local fitting energy.
  void (*local_fit)(double* out, const double* gc2, const double* gc, const double* f,
                    double g1, double mu, std::size_t n);

  // labels[k] = smallest l with phi[l][k] == min_j phi[j][k].
  void (*argmin_labels)(const double* const* phi, int num_phases, std::size_t n,
                        std::uint8_t* labels);

  double (*sum)(const double* v, std::size_t n);

  // sum of v[k] over k with labels[k] == phase
  double (*masked_sum)(const double* v, const std::uint8_t* labels, std::uint8_t phase,
                       std::size_t n);

  // sum of a[k] * b[k] over k with labels[k] == phase
  double (*masked_dot)(const double* a, const double* b, const std::uint8_t* labels,
                       std::uint8_t phase, std::size_t n);

  std::size_t (*count_differences)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
};

const KernelTable& scalar_kernels();

// Vectorised table for this build and CPU, or nullptr if unavailable.
const KernelTable* vector_kernels();

// The table used by the library.
const KernelTable& active_kernels();

}  // namespace ictm::simd

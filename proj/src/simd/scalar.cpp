// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include "ictm/simd.hpp"

namespace ictm::simd {
namespace {

void scale_spectrum(std::complex<double>* data, const double* symbol, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    data[k] = {data[k].real() * symbol[k], data[k].imag() * symbol[k]};
  }
}

void add_scaled(double* out, const double* a, const double* b, double s, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] + s * b[k];
}

void squared_difference(double* out, const double* f, double c, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double d = c - f[k];
    out[k] = d * d;
  }
}

void local_fit(double* out, const double* gc2, const double* gc, const double* f, double g1,
               double mu, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double cross = gc2[k] - (f[k] + f[k]) * gc[k];
    out[k] = mu * (cross + (f[k] * f[k]) * g1);
  }
}

void argmin_labels(const double* const* phi, int num_phases, std::size_t n,
                   std::uint8_t* labels) {
  for (std::size_t k = 0; k < n; ++k) {
    double best = phi[0][k];
    std::uint8_t arg = 0;
    for (int l = 1; l < num_phases; ++l) {
      if (phi[l][k] < best) {
        best = phi[l][k];
        arg = static_cast<std::uint8_t>(l);
      }
    }
    labels[k] = arg;
  }
}

double sum(const double* v, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += v[k];
  return acc;
}

double masked_sum(const double* v, const std::uint8_t* labels, std::uint8_t phase,
                  std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (labels[k] == phase) acc += v[k];
  }
  return acc;
}

double masked_dot(const double* a, const double* b, const std::uint8_t* labels,
                  std::uint8_t phase, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (labels[k] == phase) acc += a[k] * b[k];
  }
  return acc;
}

std::size_t count_differences(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t k = 0; k < n; ++k) count += a[k] != b[k];
  return count;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",      scale_spectrum, add_scaled, squared_difference, local_fit,
      argmin_labels, sum,            masked_sum, masked_dot,         count_differences,
  };
  return table;
}

}  // namespace ictm::simd

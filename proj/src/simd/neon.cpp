// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

// AArch64 variant. NEON is architecturally guaranteed there, so no runtime
// probe is needed. vmulq/vaddq are used instead of vfmaq to keep rounding
// identical to the scalar reference.

#include <arm_neon.h>

#include "ictm/simd.hpp"

namespace ictm::simd {
namespace {

void scale_spectrum(std::complex<double>* data, const double* symbol, std::size_t n) {
  auto* d = reinterpret_cast<double*>(data);
  for (std::size_t k = 0; k < n; ++k) {
    const float64x2_t v = vld1q_f64(d + 2 * k);
    vst1q_f64(d + 2 * k, vmulq_n_f64(v, symbol[k]));
  }
}

void add_scaled(double* out, const double* a, const double* b, double s, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t prod = vmulq_f64(vs, vld1q_f64(b + k));
    vst1q_f64(out + k, vaddq_f64(vld1q_f64(a + k), prod));
  }
  for (; k < n; ++k) out[k] = a[k] + s * b[k];
}

void squared_difference(double* out, const double* f, double c, std::size_t n) {
  const float64x2_t vc = vdupq_n_f64(c);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t d = vsubq_f64(vc, vld1q_f64(f + k));
    vst1q_f64(out + k, vmulq_f64(d, d));
  }
  for (; k < n; ++k) {
    const double d = c - f[k];
    out[k] = d * d;
  }
}

void local_fit(double* out, const double* gc2, const double* gc, const double* f, double g1,
               double mu, std::size_t n) {
  const float64x2_t vg1 = vdupq_n_f64(g1);
  const float64x2_t vmu = vdupq_n_f64(mu);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t vf = vld1q_f64(f + k);
    const float64x2_t two_f_gc = vmulq_f64(vaddq_f64(vf, vf), vld1q_f64(gc + k));
    const float64x2_t cross = vsubq_f64(vld1q_f64(gc2 + k), two_f_gc);
    const float64x2_t quad = vmulq_f64(vmulq_f64(vf, vf), vg1);
    vst1q_f64(out + k, vmulq_f64(vmu, vaddq_f64(cross, quad)));
  }
  for (; k < n; ++k) {
    const double cross = gc2[k] - (f[k] + f[k]) * gc[k];
    out[k] = mu * (cross + (f[k] * f[k]) * g1);
  }
}

void argmin_labels(const double* const* phi, int num_phases, std::size_t n,
                   std::uint8_t* labels) {
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    float64x2_t best = vld1q_f64(phi[0] + k);
    uint64x2_t arg = vdupq_n_u64(0);
    for (int l = 1; l < num_phases; ++l) {
      const float64x2_t v = vld1q_f64(phi[l] + k);
      const uint64x2_t lt = vcltq_f64(v, best);
      best = vbslq_f64(lt, v, best);
      arg = vbslq_u64(lt, vdupq_n_u64(static_cast<std::uint64_t>(l)), arg);
    }
    labels[k] = static_cast<std::uint8_t>(vgetq_lane_u64(arg, 0));
    labels[k + 1] = static_cast<std::uint8_t>(vgetq_lane_u64(arg, 1));
  }
  for (; k < n; ++k) {
    double best = phi[0][k];
    std::uint8_t a = 0;
    for (int l = 1; l < num_phases; ++l) {
      if (phi[l][k] < best) {
        best = phi[l][k];
        a = static_cast<std::uint8_t>(l);
      }
    }
    labels[k] = a;
  }
}

double sum(const double* v, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) acc = vaddq_f64(acc, vld1q_f64(v + k));
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; k < n; ++k) total += v[k];
  return total;
}

double masked_sum(const double* v, const std::uint8_t* labels, std::uint8_t phase,
                  std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const uint64x2_t m = {labels[k] == phase ? ~0ULL : 0ULL, labels[k + 1] == phase ? ~0ULL : 0ULL};
    const uint64x2_t bits = vandq_u64(m, vreinterpretq_u64_f64(vld1q_f64(v + k)));
    acc = vaddq_f64(acc, vreinterpretq_f64_u64(bits));
  }
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; k < n; ++k) {
    if (labels[k] == phase) total += v[k];
  }
  return total;
}

double masked_dot(const double* a, const double* b, const std::uint8_t* labels,
                  std::uint8_t phase, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const uint64x2_t m = {labels[k] == phase ? ~0ULL : 0ULL, labels[k + 1] == phase ? ~0ULL : 0ULL};
    const float64x2_t prod = vmulq_f64(vld1q_f64(a + k), vld1q_f64(b + k));
    acc = vaddq_f64(acc, vreinterpretq_f64_u64(vandq_u64(m, vreinterpretq_u64_f64(prod))));
  }
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; k < n; ++k) {
    if (labels[k] == phase) total += a[k] * b[k];
  }
  return total;
}

std::size_t count_differences(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::size_t count = 0;
  std::size_t k = 0;
  for (; k + 16 <= n; k += 16) {
    const uint8x16_t ne = vmvnq_u8(vceqq_u8(vld1q_u8(a + k), vld1q_u8(b + k)));
    count += vaddvq_u8(vshrq_n_u8(ne, 7));
  }
  for (; k < n; ++k) count += a[k] != b[k];
  return count;
}

}  // namespace

const KernelTable& neon_kernels() {
  static const KernelTable table{
      "neon",        scale_spectrum, add_scaled, squared_difference, local_fit,
      argmin_labels, sum,            masked_sum, masked_dot,         count_differences,
  };
  return table;
}

}  // namespace ictm::simd

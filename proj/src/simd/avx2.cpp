// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 only; callers reach these through vector_kernels(),
// which checks CPU support first. FMA is deliberately not enabled so the
// element-wise kernels round exactly like the scalar reference.

#include <immintrin.h>

#include "ictm/simd.hpp"

namespace ictm::simd {
namespace {

void scale_spectrum(std::complex<double>* data, const double* symbol, std::size_t n) {
  auto* d = reinterpret_cast<double*>(data);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    // (s0, s0, s1, s1) against (re0, im0, re1, im1)
    const __m128d s = _mm_loadu_pd(symbol + k);
    const __m256d ss = _mm256_permute4x64_pd(_mm256_castpd128_pd256(s), 0b01010000);
    const __m256d v = _mm256_loadu_pd(d + 2 * k);
    _mm256_storeu_pd(d + 2 * k, _mm256_mul_pd(v, ss));
  }
  for (; k < n; ++k) {
    data[k] = {data[k].real() * symbol[k], data[k].imag() * symbol[k]};
  }
}

void add_scaled(double* out, const double* a, const double* b, double s, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d prod = _mm256_mul_pd(vs, _mm256_loadu_pd(b + k));
    _mm256_storeu_pd(out + k, _mm256_add_pd(_mm256_loadu_pd(a + k), prod));
  }
  for (; k < n; ++k) out[k] = a[k] + s * b[k];
}

void squared_difference(double* out, const double* f, double c, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d d = _mm256_sub_pd(vc, _mm256_loadu_pd(f + k));
    _mm256_storeu_pd(out + k, _mm256_mul_pd(d, d));
  }
  for (; k < n; ++k) {
    const double d = c - f[k];
    out[k] = d * d;
  }
}

void local_fit(double* out, const double* gc2, const double* gc, const double* f, double g1,
               double mu, std::size_t n) {
  const __m256d vg1 = _mm256_set1_pd(g1);
  const __m256d vmu = _mm256_set1_pd(mu);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d vf = _mm256_loadu_pd(f + k);
    const __m256d two_f_gc = _mm256_mul_pd(_mm256_add_pd(vf, vf), _mm256_loadu_pd(gc + k));
    const __m256d cross = _mm256_sub_pd(_mm256_loadu_pd(gc2 + k), two_f_gc);
    const __m256d quad = _mm256_mul_pd(_mm256_mul_pd(vf, vf), vg1);
    _mm256_storeu_pd(out + k, _mm256_mul_pd(vmu, _mm256_add_pd(cross, quad)));
  }
  for (; k < n; ++k) {
    const double cross = gc2[k] - (f[k] + f[k]) * gc[k];
    out[k] = mu * (cross + (f[k] * f[k]) * g1);
  }
}

void argmin_labels(const double* const* phi, int num_phases, std::size_t n,
                   std::uint8_t* labels) {
  std::size_t k = 0;
  alignas(32) long long lanes[4];
  for (; k + 4 <= n; k += 4) {
    __m256d best = _mm256_loadu_pd(phi[0] + k);
    __m256i arg = _mm256_setzero_si256();
    for (int l = 1; l < num_phases; ++l) {
      const __m256d v = _mm256_loadu_pd(phi[l] + k);
      // strict less-than keeps the smallest index on ties
      const __m256d lt = _mm256_cmp_pd(v, best, _CMP_LT_OQ);
      best = _mm256_blendv_pd(best, v, lt);
      arg = _mm256_castpd_si256(_mm256_blendv_pd(
          _mm256_castsi256_pd(arg), _mm256_castsi256_pd(_mm256_set1_epi64x(l)), lt));
    }
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), arg);
    for (int j = 0; j < 4; ++j) labels[k + j] = static_cast<std::uint8_t>(lanes[j]);
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

double horizontal_sum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double sum(const double* v, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(v + k));
  double total = horizontal_sum(acc);
  for (; k < n; ++k) total += v[k];
  return total;
}

// Expands four labels into a 64-bit lane mask selecting labels == phase.
__m256d label_mask(const std::uint8_t* labels, __m256i phase) {
  int packed;
  __builtin_memcpy(&packed, labels, sizeof(packed));
  const __m256i wide = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(packed));
  return _mm256_castsi256_pd(_mm256_cmpeq_epi64(wide, phase));
}

double masked_sum(const double* v, const std::uint8_t* labels, std::uint8_t phase,
                  std::size_t n) {
  const __m256i vphase = _mm256_set1_epi64x(phase);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d m = label_mask(labels + k, vphase);
    acc = _mm256_add_pd(acc, _mm256_and_pd(m, _mm256_loadu_pd(v + k)));
  }
  double total = horizontal_sum(acc);
  for (; k < n; ++k) {
    if (labels[k] == phase) total += v[k];
  }
  return total;
}

double masked_dot(const double* a, const double* b, const std::uint8_t* labels,
                  std::uint8_t phase, std::size_t n) {
  const __m256i vphase = _mm256_set1_epi64x(phase);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d m = label_mask(labels + k, vphase);
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    acc = _mm256_add_pd(acc, _mm256_and_pd(m, prod));
  }
  double total = horizontal_sum(acc);
  for (; k < n; ++k) {
    if (labels[k] == phase) total += a[k] * b[k];
  }
  return total;
}

std::size_t count_differences(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::size_t count = 0;
  std::size_t k = 0;
  for (; k + 32 <= n; k += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + k));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + k));
    const unsigned equal = static_cast<unsigned>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(va, vb)));
    count += 32 - static_cast<std::size_t>(__builtin_popcount(equal));
  }
  for (; k < n; ++k) count += a[k] != b[k];
  return count;
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{
      "avx2",        scale_spectrum, add_scaled, squared_difference, local_fit,
      argmin_labels, sum,            masked_sum, masked_dot,         count_differences,
  };
  return table;
}

}  // namespace ictm::simd

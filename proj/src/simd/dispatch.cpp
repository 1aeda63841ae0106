// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <string_view>

#include "ictm/simd.hpp"

namespace ictm::simd {

#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_kernels();
#elif defined(__aarch64__)
const KernelTable& neon_kernels();
#endif

const KernelTable* vector_kernels() {
#if defined(__x86_64__) || defined(_M_X64)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_kernels() : nullptr;
#elif defined(__aarch64__)
  return &neon_kernels();
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  static const KernelTable& table = [] () -> const KernelTable& {
    const char* forced = std::getenv("ICTM_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_kernels();
    const KernelTable* vec = vector_kernels();
    return vec != nullptr ? *vec : scalar_kernels();
  }();
  return table;
}

}  // namespace ictm::simd

// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <variant>
#include <vector>

#include "ictm/grid.hpp"

namespace ictm {

// Heat kernel G_tau(x) = exp(-|x|^2 / 4 tau) / (4 pi tau), tau in physical
// (squared-length) units of the grid's domain. Built directly in frequency
// space as exp(-tau |xi|^2), so it has unit mass and composes exactly:
// G_a * G_b = G_{a+b}.
struct HeatKernel {
  double tau;
};

// Gaussian low-pass filter with standard deviation sigma in *pixels*, sampled
// on a (4*ceil(sigma)+1)^2 window as exp(-r^2 / 2 sigma^2) and normalised to
// unit mass. This is the usual image-processing parameterisation, not the
// 4*sigma variance convention of HeatKernel.
struct GaussianFilter {
  double sigma;
};

// Indicator of the open disk |x| < rho with rho in pixels, sampled at pixel
// centres and weighted by pixel area. Not normalised: its mass is the area of
// the sampled disk.
struct DiskKernel {
  double rho;
};

using KernelKind = std::variant<HeatKernel, GaussianFilter, DiskKernel>;

enum class Boundary {
  periodic,  // circular convolution on the grid
  mirror,    // even reflection across the image border
};

struct KernelSpec {
  KernelKind kind;
  GridSpec grid;
  Boundary boundary = Boundary::periodic;
};

// A kernel with its precomputed Fourier symbol. Immutable and shareable.
class ConvOperator {
 public:
  const KernelSpec& spec() const noexcept { return spec_; }
  const GridSpec& grid() const noexcept { return spec_.grid; }

  // Size of the periodic grid the transform runs on (doubled under mirror).
  int transform_width() const noexcept { return transform_width_; }
  int transform_height() const noexcept { return transform_height_; }

  // Real symbol on the half-spectrum, transform_height rows of
  // transform_width/2 + 1 modes (r2c layout).
  std::span<const double> symbol() const noexcept { return symbol_; }

  // Symbol at zero frequency, i.e. the kernel's integral.
  double mass() const noexcept { return symbol_.front(); }

 private:
  friend ConvOperator build(const KernelSpec& spec);
  friend ScalarField convolve(const ConvOperator& op, const ScalarField& field);

  ConvOperator(KernelSpec spec, int tw, int th, std::vector<double> symbol);

  KernelSpec spec_;
  int transform_width_;
  int transform_height_;
  std::vector<double> symbol_;
  std::vector<double> scaled_symbol_;  // symbol / (tw * th), applied per transform
};

// Throws std::invalid_argument for nonpositive or non-finite parameters.
ConvOperator build(const KernelSpec& spec);

// (K * f)(x) = sum_y K(x - y) f(y) dA under the operator's boundary rule.
// Throws std::invalid_argument when the field's grid differs from the
// operator's.
ScalarField convolve(const ConvOperator& op, const ScalarField& field);

// Memoises build() per (kind, parameter, grid, boundary).
class KernelCache {
 public:
  std::shared_ptr<const ConvOperator> get(const KernelSpec& spec);
  std::size_t size() const;

 private:
  using Key = std::tuple<std::size_t, double, int, int, double, double, int>;
  static Key key_of(const KernelSpec& spec);

  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const ConvOperator>> entries_;
};

KernelCache& default_kernel_cache();

}  // namespace ictm

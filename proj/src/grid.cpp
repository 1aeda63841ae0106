// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include "ictm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ictm/simd.hpp"

namespace ictm {

GridSpec::GridSpec(int width, int height, double length_x, double length_y)
    : width_(width), height_(height), length_x_(length_x), length_y_(length_y) {
  if (width < 2 || height < 2) {
    throw std::invalid_argument("grid must be at least 2x2, got " + std::to_string(width) + "x" +
                                std::to_string(height));
  }
  if (!(length_x > 0.0) || !(length_y > 0.0) || !std::isfinite(length_x) ||
      !std::isfinite(length_y)) {
    throw std::invalid_argument("grid domain lengths must be finite and positive");
  }
}

GridSpec GridSpec::for_image(int width, int height) {
  const double lx = 2.0 * std::numbers::pi;
  return GridSpec(width, height, lx, lx * height / width);
}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.pixel_count()) {
    throw std::invalid_argument("scalar field has " + std::to_string(values_.size()) +
                                " values for a grid of " + std::to_string(grid_.pixel_count()) +
                                " pixels");
  }
  const auto bad = std::find_if(values_.begin(), values_.end(),
                                [](double v) { return !std::isfinite(v); });
  if (bad != values_.end()) {
    throw std::invalid_argument("scalar field value at pixel " +
                                std::to_string(bad - values_.begin()) + " is not finite");
  }
}

ScalarField ScalarField::constant(GridSpec grid, double value) {
  return ScalarField(grid, std::vector<double>(grid.pixel_count(), value));
}

LabelField::LabelField(GridSpec grid, int num_phases, std::vector<std::uint8_t> labels)
    : grid_(grid), num_phases_(num_phases), labels_(std::move(labels)) {
  if (num_phases < 2 || num_phases > kMaxPhases) {
    throw std::invalid_argument("number of phases must be in [2, 255], got " +
                                std::to_string(num_phases));
  }
  if (labels_.size() != grid_.pixel_count()) {
    throw std::invalid_argument("label field has " + std::to_string(labels_.size()) +
                                " labels for a grid of " + std::to_string(grid_.pixel_count()) +
                                " pixels");
  }
  const auto bad = std::find_if(labels_.begin(), labels_.end(),
                                [&](std::uint8_t l) { return l >= num_phases_; });
  if (bad != labels_.end()) {
    throw std::invalid_argument("label " + std::to_string(*bad) + " at pixel " +
                                std::to_string(bad - labels_.begin()) + " is outside [0, " +
                                std::to_string(num_phases_) + ")");
  }
}

LabelField LabelField::uniform(GridSpec grid, int num_phases, int phase) {
  if (phase < 0 || phase >= num_phases) {
    throw std::invalid_argument("phase " + std::to_string(phase) + " outside [0, " +
                                std::to_string(num_phases) + ")");
  }
  return LabelField(grid, num_phases,
                    std::vector<std::uint8_t>(grid.pixel_count(), static_cast<std::uint8_t>(phase)));
}

std::vector<std::size_t> LabelField::phase_counts() const {
  std::vector<std::size_t> counts(num_phases_, 0);
  for (std::uint8_t l : labels_) ++counts[l];
  return counts;
}

ScalarField indicator(const LabelField& labels, int phase) {
  if (phase < 0 || phase >= labels.num_phases()) {
    throw std::invalid_argument("phase index " + std::to_string(phase) + " outside [0, " +
                                std::to_string(labels.num_phases()) + ")");
  }
  std::vector<double> u(labels.size());
  const auto src = labels.labels();
  std::transform(src.begin(), src.end(), u.begin(),
                 [phase](std::uint8_t l) { return l == phase ? 1.0 : 0.0; });
  return ScalarField(labels.grid(), std::move(u));
}

ScalarField normalize_image(const ScalarField& raw) {
  const auto v = raw.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double min = *lo;
  const double range = *hi - *lo;
  std::vector<double> out(v.size(), 0.0);
  if (range > 0.0) {
    std::transform(v.begin(), v.end(), out.begin(),
                   [=](double x) { return (x - min) / range; });
  }
  return ScalarField(raw.grid(), std::move(out));
}

std::size_t changed_pixels(const LabelField& a, const LabelField& b) {
  if (!(a.grid() == b.grid()) || a.num_phases() != b.num_phases()) {
    throw std::invalid_argument("changed_pixels: label fields differ in grid or phase count");
  }
  return simd::active_kernels().count_differences(a.labels().data(), b.labels().data(), a.size());
}

}  // namespace ictm

// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ictm {

// Regular pixel grid over a rectangular physical domain centred at the origin.
// Pixel (col, row) sits at x = -length_x/2 + col*hx, y = -length_y/2 + row*hy,
// so for even sizes the origin is a pixel centre.
class GridSpec {
 public:
  GridSpec(int width, int height, double length_x, double length_y);

  // Default domain: [-pi, pi] along x with square pixels, i.e.
  // length_y = 2*pi*height/width.
  static GridSpec for_image(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double length_x() const noexcept { return length_x_; }
  double length_y() const noexcept { return length_y_; }
  double hx() const noexcept { return length_x_ / width_; }
  double hy() const noexcept { return length_y_ / height_; }
  double pixel_area() const noexcept { return hx() * hy(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  double x_at(int col) const noexcept { return -0.5 * length_x_ + col * hx(); }
  double y_at(int row) const noexcept { return -0.5 * length_y_ + row * hy(); }

  bool operator==(const GridSpec&) const = default;

 private:
  int width_;
  int height_;
  double length_x_;
  double length_y_;
};

// Real-valued samples on a grid, row-major. Values are always finite.
class ScalarField {
 public:
  ScalarField(GridSpec grid, std::vector<double> values);

  static ScalarField constant(GridSpec grid, double value);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const double> values() const& noexcept { return values_; }
  // A span into a temporary would dangle.
  std::span<const double> values() const&& = delete;
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t index) const noexcept { return values_[index]; }
  double operator()(int col, int row) const noexcept {
    return values_[static_cast<std::size_t>(row) * grid_.width() + col];
  }

  // Releases the sample buffer so callers can recycle it.
  std::vector<double> take_values() && { return std::move(values_); }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

// Hard partition of the grid into num_phases segments, stored as one phase
// index per pixel. The indicator fields u_i are derived on demand, so the
// partition constraint sum_i u_i = 1 holds by construction.
class LabelField {
 public:
  static constexpr int kMaxPhases = 255;

  LabelField(GridSpec grid, int num_phases, std::vector<std::uint8_t> labels);

  static LabelField uniform(GridSpec grid, int num_phases, int phase);

  const GridSpec& grid() const noexcept { return grid_; }
  int num_phases() const noexcept { return num_phases_; }
  std::span<const std::uint8_t> labels() const& noexcept { return labels_; }
  std::span<const std::uint8_t> labels() const&& = delete;
  std::size_t size() const noexcept { return labels_.size(); }
  int operator[](std::size_t index) const noexcept { return labels_[index]; }
  int operator()(int col, int row) const noexcept {
    return labels_[static_cast<std::size_t>(row) * grid_.width() + col];
  }

  // Pixel count of every phase.
  std::vector<std::size_t> phase_counts() const;

  bool operator==(const LabelField&) const = default;

 private:
  GridSpec grid_;
  int num_phases_;
  std::vector<std::uint8_t> labels_;
};

// u_i as a 0/1 field. Throws std::invalid_argument for phase outside [0, n).
ScalarField indicator(const LabelField& labels, int phase);

// Affine rescale onto [0, 1]; constant images map to the zero field.
ScalarField normalize_image(const ScalarField& raw);

// Number of pixels whose phase differs. Throws std::invalid_argument when the
// grids or phase counts disagree.
std::size_t changed_pixels(const LabelField& a, const LabelField& b);

}  // namespace ictm

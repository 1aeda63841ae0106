// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "ictm/app/app.hpp"

namespace ictm::app {
namespace {

void add_noise(std::vector<double>& values, double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : values) v += noise(rng);
}

}  // namespace

ScalarField bias_field(const GridSpec& grid, double strength) {
  std::vector<double> b(grid.pixel_count());
  const double half_x = 0.5 * grid.length_x();
  for (int row = 0; row < grid.height(); ++row) {
    const double y = grid.y_at(row);
    for (int col = 0; col < grid.width(); ++col) {
      const double x = grid.x_at(col);
      // |shape| <= 1: a horizontal ramp plus two slow oscillations
      const double shape = 0.5 * (x / half_x) + 0.3 * std::sin(0.8 * y + 0.5) +
                           0.2 * std::cos(0.6 * (x + y));
      b[static_cast<std::size_t>(row) * grid.width() + col] = 1.0 + strength * shape;
    }
  }
  return ScalarField(grid, std::move(b));
}

double bias_level(int level, int count, double max_strength) {
  return count <= 1 ? max_strength : max_strength * level / (count - 1);
}

Synthetic synth_star(const StarParams& p) {
  if (p.size < 8 || p.arms < 1 || !(p.radius > 0.0) || p.bias < 0.0 || p.bias >= 1.0) {
    throw UserError("star: need size >= 8, arms >= 1, radius > 0 and bias in [0, 1)");
  }
  const GridSpec grid = GridSpec::for_image(p.size, p.size);
  const ScalarField b = bias_field(grid, p.bias);
  std::vector<double> values(grid.pixel_count());
  std::vector<std::uint8_t> truth(grid.pixel_count());
  for (int row = 0; row < grid.height(); ++row) {
    for (int col = 0; col < grid.width(); ++col) {
      const double x = grid.x_at(col);
      const double y = grid.y_at(row);
      const double boundary = p.radius * (1.0 + p.amplitude * std::cos(p.arms * std::atan2(y, x)));
      const bool inside = std::hypot(x, y) < boundary;
      const std::size_t k = static_cast<std::size_t>(row) * grid.width() + col;
      truth[k] = inside ? 1 : 0;
      values[k] = b[k] * (inside ? p.foreground : p.background);
    }
  }
  add_noise(values, p.noise, p.seed);
  return {ScalarField(grid, std::move(values)), LabelField(grid, 2, std::move(truth))};
}

Synthetic synth_two_level(const TwoLevelParams& p) {
  if (p.shape != "split" && p.shape != "disk") {
    throw UserError("two-level: shape must be split or disk, got '" + p.shape + "'");
  }
  const GridSpec grid = GridSpec::for_image(p.width, p.height);
  std::vector<double> values(grid.pixel_count());
  std::vector<std::uint8_t> truth(grid.pixel_count());
  for (int row = 0; row < grid.height(); ++row) {
    for (int col = 0; col < grid.width(); ++col) {
      const bool high = p.shape == "split"
                            ? col >= grid.width() / 2
                            : std::hypot(grid.x_at(col), grid.y_at(row)) < p.radius;
      const std::size_t k = static_cast<std::size_t>(row) * grid.width() + col;
      truth[k] = high ? 1 : 0;
      values[k] = high ? p.high : p.low;
    }
  }
  add_noise(values, p.noise, p.seed);
  return {ScalarField(grid, std::move(values)), LabelField(grid, 2, std::move(truth))};
}

void write_synthetic(const std::filesystem::path& dir, const Synthetic& data) {
  std::filesystem::create_directories(dir);
  save_image(dir / "image.png", normalize_image(data.image));
  save_label_map(dir / "truth.png", data.truth);
}

}  // namespace ictm::app

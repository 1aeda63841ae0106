// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "ictm/app/app.hpp"

namespace ictm::app {
namespace {

LabelField circles(const InitSpec& spec, const GridSpec& grid, int n) {
  if (spec.count < 1 || !(spec.radius > 0.0)) {
    throw UserError("circles initializer needs init_count >= 1 and init_radius > 0");
  }
  const int per_side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(spec.count))));
  const double dx = grid.length_x() / per_side;
  const double dy = grid.length_y() / per_side;
  if (spec.count > 1 && 2.0 * spec.radius >= std::min(dx, dy)) {
    throw UserError("circles initializer: " + std::to_string(spec.count) +
                    " circles of radius " + std::to_string(spec.radius) + " do not fit disjointly");
  }
  struct Center {
    double x, y;
  };
  std::vector<Center> centers;
  if (spec.count == 1) {
    centers.push_back({0.0, 0.0});
  } else {
    for (int j = 0; j < spec.count; ++j) {
      const int a = j % per_side;
      const int b = j / per_side;
      centers.push_back({-0.5 * grid.length_x() + (a + 0.5) * dx,
                         -0.5 * grid.length_y() + (b + 0.5) * dy});
    }
  }
  std::vector<std::uint8_t> labels(grid.pixel_count(), 0);
  const double r2 = spec.radius * spec.radius;
  for (int row = 0; row < grid.height(); ++row) {
    for (int col = 0; col < grid.width(); ++col) {
      const double x = grid.x_at(col);
      const double y = grid.y_at(row);
      for (std::size_t j = 0; j < centers.size(); ++j) {
        const double ex = x - centers[j].x;
        const double ey = y - centers[j].y;
        if (ex * ex + ey * ey < r2) {
          labels[static_cast<std::size_t>(row) * grid.width() + col] =
              static_cast<std::uint8_t>(1 + j % (n - 1));
          break;
        }
      }
    }
  }
  return LabelField(grid, n, std::move(labels));
}

LabelField checkerboard(int block, const GridSpec& grid, int n) {
  if (block < 1) throw UserError("checkerboard initializer needs init_block >= 1");
  std::vector<std::uint8_t> labels(grid.pixel_count());
  for (int row = 0; row < grid.height(); ++row) {
    for (int col = 0; col < grid.width(); ++col) {
      labels[static_cast<std::size_t>(row) * grid.width() + col] =
          static_cast<std::uint8_t>((col / block + row / block) % n);
    }
  }
  return LabelField(grid, n, std::move(labels));
}

LabelField stripes(int width, const GridSpec& grid, int n) {
  if (width < 1) throw UserError("stripes initializer needs init_stripe >= 1");
  std::vector<std::uint8_t> labels(grid.pixel_count());
  for (int row = 0; row < grid.height(); ++row) {
    for (int col = 0; col < grid.width(); ++col) {
      labels[static_cast<std::size_t>(row) * grid.width() + col] =
          static_cast<std::uint8_t>((col / width) % n);
    }
  }
  return LabelField(grid, n, std::move(labels));
}

LabelField random_labels(const GridSpec& grid, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> labels(grid.pixel_count());
  for (auto& l : labels) l = static_cast<std::uint8_t>(rng() % static_cast<std::uint64_t>(n));
  return LabelField(grid, n, std::move(labels));
}

}  // namespace

LabelField initialize(const InitSpec& spec, const GridSpec& grid, int num_phases,
                      std::uint64_t seed) {
  if (num_phases < 2 || num_phases > LabelField::kMaxPhases) {
    throw UserError("number of phases must be in [2, 255]");
  }
  if (spec.kind == "circles") return circles(spec, grid, num_phases);
  if (spec.kind == "checkerboard") return checkerboard(spec.block, grid, num_phases);
  if (spec.kind == "stripes") return stripes(spec.stripe, grid, num_phases);
  if (spec.kind == "random") return random_labels(grid, num_phases, seed);
  if (spec.kind == "file") {
    if (spec.file.empty()) throw UserError("file initializer needs init_file");
    LabelField loaded = load_label_map(spec.file, num_phases);
    if (!(loaded.grid() == grid)) {
      throw UserError("initial label map " + spec.file.string() + " does not match the image size");
    }
    return loaded;
  }
  throw UserError("unknown initializer '" + spec.kind +
                  "' (expected circles, checkerboard, stripes, random or file)");
}

}  // namespace ictm::app

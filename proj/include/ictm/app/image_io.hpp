// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <stdexcept>

#include "ictm/grid.hpp"

namespace ictm::app {

// Bad input from the user: missing files, undecodable images, bad config.
class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads an 8/16-bit PNG or a PGM (P2/P5) as a grayscale field on the default
// [-pi, pi] grid. Colour inputs become the mean of their channels; alpha is
// ignored. Raw sample values are kept (0..255 or 0..65535) unless normalize
// is set, in which case the field is rescaled onto [0, 1].
ScalarField load_image(const std::filesystem::path& path, bool normalize = false);

// Grayscale PNG of 8 or 16 bits; values are clamped to [0, 1] and scaled to
// the full sample range.
void save_image(const std::filesystem::path& path, const ScalarField& image, int bit_depth = 8);

// Indexed-colour PNG whose palette index is the phase.
void save_label_map(const std::filesystem::path& path, const LabelField& labels);

// Reads a label map. Palette PNGs give phases by index; grayscale images
// (PNG or PGM) give phases by rank of the distinct gray levels. num_phases of
// zero means "as many as the file uses" (at least 2).
LabelField load_label_map(const std::filesystem::path& path, int num_phases = 0);

// RGB PNG of the image with 4-connected phase boundaries painted per phase.
void save_overlay(const std::filesystem::path& path, const ScalarField& image,
                  const LabelField& labels);

}  // namespace ictm::app

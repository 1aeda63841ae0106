// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include "ictm/app/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace ictm::app {
namespace {

namespace fs = std::filesystem;

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_file(const fs::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw UserError(std::string(mode[0] == 'r' ? "cannot open " : "cannot create ") +
                    path.string());
  }
  return f;
}

// Decoded PNG samples, one entry per channel per pixel.
struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;
  bool palette = false;
  std::vector<std::uint16_t> samples;
};

struct ErrorSink {
  char message[256] = "";
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof(sink->message), "%s", msg);
  longjmp(png_jmpbuf(png), 1);
}

void on_png_warning(png_structp, png_const_charp) {}

// libpng reports errors by longjmp; everything with a destructor is created
// before setjmp so nothing is skipped on the error path.
bool decode_png(std::FILE* file, bool keep_palette, Decoded& out, ErrorSink& sink,
                std::vector<png_byte>& buffer, std::vector<png_bytep>& rows) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error,
                                           on_png_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  out.palette = color == PNG_COLOR_TYPE_PALETTE && keep_palette;
  if (color == PNG_COLOR_TYPE_PALETTE) {
    if (keep_palette) png_set_packing(png);
    else png_set_palette_to_rgb(png);
  }
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // host little-endian 16-bit samples
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (out.width <= 0 || out.height <= 0) {
    std::snprintf(sink.message, sizeof(sink.message), "empty image");
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  buffer.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (int r = 0; r < out.height; ++r) rows[r] = buffer.data() + rowbytes * r;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(count);
  if (out_depth == 16) {
    for (std::size_t k = 0; k < count; ++k) {
      out.samples[k] = static_cast<std::uint16_t>(buffer[2 * k] | (buffer[2 * k + 1] << 8));
    }
  } else {
    for (std::size_t k = 0; k < count; ++k) out.samples[k] = buffer[k];
  }
  return true;
}

Decoded read_png(const fs::path& path, bool keep_palette) {
  File file = open_file(path, "rb");
  std::array<unsigned char, 8> sig{};
  if (std::fread(sig.data(), 1, sig.size(), file.get()) != sig.size() ||
      png_sig_cmp(sig.data(), 0, sig.size()) != 0) {
    throw UserError("cannot decode " + path.string() + ": not a PNG file");
  }
  std::rewind(file.get());
  Decoded out;
  ErrorSink sink;
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (!decode_png(file.get(), keep_palette, out, sink, buffer, rows)) {
    throw UserError("cannot decode " + path.string() + ": " +
                    (sink.message[0] ? sink.message : "libpng failure"));
  }
  return out;
}

std::string next_token(std::istream& in) {
  std::string token;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(c);
  }
  return token;
}

Decoded read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open " + path.string());
  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P2") {
    throw UserError("cannot decode " + path.string() + ": not a PGM file");
  }
  Decoded out;
  out.channels = 1;
  int maxval = 0;
  try {
    out.width = std::stoi(next_token(in));
    out.height = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw UserError("cannot decode " + path.string() + ": malformed PGM header");
  }
  if (out.width <= 0 || out.height <= 0 || maxval <= 0 || maxval > 65535) {
    throw UserError("cannot decode " + path.string() + ": invalid PGM dimensions");
  }
  const std::size_t count = static_cast<std::size_t>(out.width) * out.height;
  out.samples.resize(count);
  if (magic == "P5") {
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
      throw UserError("cannot decode " + path.string() + ": truncated PGM data");
    }
    for (std::size_t k = 0; k < count; ++k) {
      out.samples[k] = bytes == 2 ? static_cast<std::uint16_t>((raw[2 * k] << 8) | raw[2 * k + 1])
                                  : raw[k];
    }
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      const std::string token = next_token(in);
      if (token.empty()) throw UserError("cannot decode " + path.string() + ": truncated PGM data");
      out.samples[k] = static_cast<std::uint16_t>(std::stoi(token));
    }
  }
  return out;
}

bool is_pgm(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".pnm";
}

Decoded read_any(const fs::path& path, bool keep_palette) {
  if (!fs::exists(path)) throw UserError("input file does not exist: " + path.string());
  return is_pgm(path) ? read_pgm(path) : read_png(path, keep_palette);
}

// Writes 8-bit or 16-bit rows of the given colour type.
void write_png(const fs::path& path, int width, int height, int color_type, int depth,
               const std::vector<png_byte>& data, const std::vector<png_color>& palette = {}) {
  File file = open_file(path, "wb");
  ErrorSink sink;
  const std::size_t rowbytes = data.size() / height;
  std::vector<png_const_bytep> rows(height);
  for (int r = 0; r < height; ++r) rows[r] = data.data() + rowbytes * r;

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error,
                                            on_png_warning);
  if (png == nullptr) throw std::runtime_error("libpng: cannot allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng: cannot allocate info struct");
  }
  volatile bool ok = false;
  if (setjmp(png_jmpbuf(png)) == 0) {
    png_init_io(png, file.get());
    png_set_IHDR(png, info, width, height, depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    if (!palette.empty()) {
      png_set_PLTE(png, info, palette.data(), static_cast<int>(palette.size()));
    }
    png_write_info(png, info);
    png_write_rows(png, const_cast<png_bytepp>(rows.data()), height);
    png_write_end(png, nullptr);
    ok = true;
  }
  png_destroy_write_struct(&png, &info);
  if (!ok) {
    throw std::runtime_error("cannot write " + path.string() + ": " +
                             (sink.message[0] ? sink.message : "libpng failure"));
  }
}

png_color phase_color(int phase) {
  static constexpr std::array<png_color, 8> base{{{0, 0, 0},
                                                  {255, 255, 255},
                                                  {230, 25, 75},
                                                  {60, 180, 75},
                                                  {0, 130, 200},
                                                  {255, 225, 25},
                                                  {145, 30, 180},
                                                  {245, 130, 48}}};
  if (phase < static_cast<int>(base.size())) return base[phase];
  const auto v = static_cast<png_byte>((phase * 97) % 256);
  return {v, static_cast<png_byte>(255 - v), static_cast<png_byte>((v * 3) % 256)};
}

png_color boundary_color(int phase) {
  static constexpr std::array<png_color, 6> colors{{{255, 0, 0},
                                                    {0, 255, 0},
                                                    {0, 128, 255},
                                                    {255, 255, 0},
                                                    {255, 0, 255},
                                                    {0, 255, 255}}};
  return colors[phase % colors.size()];
}

}  // namespace

ScalarField load_image(const fs::path& path, bool normalize) {
  const Decoded d = read_any(path, false);
  std::vector<double> values(static_cast<std::size_t>(d.width) * d.height);
  for (std::size_t k = 0; k < values.size(); ++k) {
    double acc = 0.0;
    for (int c = 0; c < d.channels; ++c) acc += d.samples[k * d.channels + c];
    values[k] = acc / d.channels;
  }
  if (d.width < 2 || d.height < 2) {
    throw UserError("image " + path.string() + " is too small (" + std::to_string(d.width) + "x" +
                    std::to_string(d.height) + ")");
  }
  ScalarField field(GridSpec::for_image(d.width, d.height), std::move(values));
  return normalize ? normalize_image(field) : field;
}

void save_image(const fs::path& path, const ScalarField& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw std::invalid_argument("save_image: bit depth must be 8 or 16");
  }
  const auto v = image.values();
  const double top = bit_depth == 8 ? 255.0 : 65535.0;
  const std::size_t bytes = bit_depth / 8;
  std::vector<png_byte> data(v.size() * bytes);
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto q = static_cast<std::uint16_t>(std::lround(std::clamp(v[k], 0.0, 1.0) * top));
    if (bytes == 1) {
      data[k] = static_cast<png_byte>(q);
    } else {
      data[2 * k] = static_cast<png_byte>(q >> 8);  // PNG is big-endian
      data[2 * k + 1] = static_cast<png_byte>(q & 0xff);
    }
  }
  write_png(path, image.grid().width(), image.grid().height(), PNG_COLOR_TYPE_GRAY, bit_depth, data);
}

void save_label_map(const fs::path& path, const LabelField& labels) {
  std::vector<png_color> palette(labels.num_phases());
  for (int i = 0; i < labels.num_phases(); ++i) palette[i] = phase_color(i);
  const auto src = labels.labels();
  write_png(path, labels.grid().width(), labels.grid().height(), PNG_COLOR_TYPE_PALETTE, 8,
            std::vector<png_byte>(src.begin(), src.end()), palette);
}

LabelField load_label_map(const fs::path& path, int num_phases) {
  const Decoded d = read_any(path, true);
  if (d.width < 2 || d.height < 2) throw UserError("label map " + path.string() + " is too small");
  const std::size_t count = static_cast<std::size_t>(d.width) * d.height;
  std::vector<std::uint8_t> labels(count);
  int used = 0;
  if (d.palette) {
    for (std::size_t k = 0; k < count; ++k) {
      labels[k] = static_cast<std::uint8_t>(d.samples[k]);
      used = std::max(used, labels[k] + 1);
    }
  } else {
    std::map<std::uint32_t, int> rank;
    auto gray = [&](std::size_t k) {
      std::uint32_t acc = 0;
      for (int c = 0; c < d.channels; ++c) acc += d.samples[k * d.channels + c];
      return acc;
    };
    for (std::size_t k = 0; k < count; ++k) rank.emplace(gray(k), 0);
    if (rank.size() > static_cast<std::size_t>(LabelField::kMaxPhases)) {
      throw UserError("label map " + path.string() + " has more than 255 distinct levels");
    }
    int next = 0;
    for (auto& [level, r] : rank) r = next++;
    for (std::size_t k = 0; k < count; ++k) labels[k] = static_cast<std::uint8_t>(rank[gray(k)]);
    used = next;
  }
  if (num_phases == 0) num_phases = std::max(used, 2);
  if (used > num_phases) {
    throw UserError("label map " + path.string() + " uses " + std::to_string(used) +
                    " phases, expected at most " + std::to_string(num_phases));
  }
  return LabelField(GridSpec::for_image(d.width, d.height), num_phases, std::move(labels));
}

void save_overlay(const fs::path& path, const ScalarField& image, const LabelField& labels) {
  const int w = image.grid().width();
  const int h = image.grid().height();
  const ScalarField gray = normalize_image(image);
  std::vector<png_byte> rgb(static_cast<std::size_t>(w) * h * 3);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const std::size_t k = static_cast<std::size_t>(row) * w + col;
      const int l = labels[k];
      const bool edge = (col > 0 && labels(col - 1, row) != l) ||
                        (col + 1 < w && labels(col + 1, row) != l) ||
                        (row > 0 && labels(col, row - 1) != l) ||
                        (row + 1 < h && labels(col, row + 1) != l);
      if (edge) {
        const png_color c = boundary_color(l);
        rgb[3 * k] = c.red;
        rgb[3 * k + 1] = c.green;
        rgb[3 * k + 2] = c.blue;
      } else {
        const auto v = static_cast<png_byte>(std::lround(gray[k] * 255.0));
        rgb[3 * k] = rgb[3 * k + 1] = rgb[3 * k + 2] = v;
      }
    }
  }
  write_png(path, w, h, PNG_COLOR_TYPE_RGB, 8, rgb);
}

}  // namespace ictm::app

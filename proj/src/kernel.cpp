// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include "ictm/kernel.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ictm/simd.hpp"

namespace ictm {
namespace {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_alloc(std::size_t count) {
  void* p = fftw_malloc(sizeof(T) * count);
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(static_cast<T*>(p));
}

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// FFTW planning is not thread-safe; execution on distinct buffers is. Plans
// are created once per transform size under a lock and live for the process.
const PlanPair& plans_for(int tw, int th) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, PlanPair> plans;
  std::lock_guard lock(mutex);
  auto it = plans.find({tw, th});
  if (it != plans.end()) return it->second;

  const std::size_t n_real = static_cast<std::size_t>(tw) * th;
  const std::size_t n_complex = static_cast<std::size_t>(tw / 2 + 1) * th;
  auto real = fftw_alloc<double>(n_real);
  auto spec = fftw_alloc<fftw_complex>(n_complex);
  PlanPair pair;
  pair.forward = fftw_plan_dft_r2c_2d(th, tw, real.get(), spec.get(), FFTW_ESTIMATE);
  pair.backward = fftw_plan_dft_c2r_2d(th, tw, spec.get(), real.get(), FFTW_ESTIMATE);
  if (pair.forward == nullptr || pair.backward == nullptr) {
    throw std::runtime_error("FFTW failed to plan a " + std::to_string(tw) + "x" +
                             std::to_string(th) + " transform");
  }
  return plans.emplace(std::make_pair(tw, th), pair).first->second;
}

// Per-thread scratch buffers; reallocated only when the transform size grows.
struct Workspace {
  std::size_t real_capacity = 0;
  std::size_t complex_capacity = 0;
  FftwBuffer<double> real;
  FftwBuffer<fftw_complex> spectrum;

  void reserve(std::size_t n_real, std::size_t n_complex) {
    if (n_real > real_capacity) {
      real = fftw_alloc<double>(n_real);
      real_capacity = n_real;
    }
    if (n_complex > complex_capacity) {
      spectrum = fftw_alloc<fftw_complex>(n_complex);
      complex_capacity = n_complex;
    }
  }
};

Workspace& thread_workspace() {
  thread_local Workspace ws;
  return ws;
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("kernel parameter ") + name +
                                " must be finite and positive, got " + std::to_string(value));
  }
}

// Signed offset of index i on a periodic axis of length n (minimum image).
int wrap_offset(int i, int n) { return i <= n / 2 ? i : i - n; }

std::vector<double> heat_symbol(double tau, int tw, int th, double lx, double ly) {
  const int half = tw / 2 + 1;
  std::vector<double> symbol(static_cast<std::size_t>(half) * th);
  const double kx_unit = 2.0 * std::numbers::pi / lx;
  const double ky_unit = 2.0 * std::numbers::pi / ly;
  for (int row = 0; row < th; ++row) {
    const double ky = ky_unit * wrap_offset(row, th);
    for (int col = 0; col < half; ++col) {
      const double kx = kx_unit * col;
      symbol[static_cast<std::size_t>(row) * half + col] = std::exp(-tau * (kx * kx + ky * ky));
    }
  }
  return symbol;
}

// Forward transform of real, even spatial weights; keeps the real part.
std::vector<double> spatial_symbol(const std::vector<double>& weights, int tw, int th) {
  const int half = tw / 2 + 1;
  const std::size_t n_complex = static_cast<std::size_t>(half) * th;
  const PlanPair& plans = plans_for(tw, th);
  auto real = fftw_alloc<double>(weights.size());
  auto spec = fftw_alloc<fftw_complex>(n_complex);
  std::copy(weights.begin(), weights.end(), real.get());
  fftw_execute_dft_r2c(plans.forward, real.get(), spec.get());
  std::vector<double> symbol(n_complex);
  for (std::size_t k = 0; k < n_complex; ++k) symbol[k] = spec[k][0];
  return symbol;
}

std::vector<double> gaussian_weights(double sigma, int tw, int th) {
  std::vector<double> w(static_cast<std::size_t>(tw) * th, 0.0);
  const int radius = 2 * static_cast<int>(std::ceil(sigma));
  double total = 0.0;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      const int row = ((dy % th) + th) % th;
      const int col = ((dx % tw) + tw) % tw;
      w[static_cast<std::size_t>(row) * tw + col] += g;
      total += g;
    }
  }
  for (double& v : w) v /= total;
  return w;
}

std::vector<double> disk_weights(double rho, int tw, int th, double pixel_area) {
  std::vector<double> w(static_cast<std::size_t>(tw) * th, 0.0);
  const double r2 = rho * rho;
  for (int row = 0; row < th; ++row) {
    const int dy = wrap_offset(row, th);
    for (int col = 0; col < tw; ++col) {
      const int dx = wrap_offset(col, tw);
      if (dx * dx + dy * dy < r2) w[static_cast<std::size_t>(row) * tw + col] = pixel_area;
    }
  }
  return w;
}

}  // namespace

ConvOperator::ConvOperator(KernelSpec spec, int tw, int th, std::vector<double> symbol)
    : spec_(std::move(spec)), transform_width_(tw), transform_height_(th),
      symbol_(std::move(symbol)) {
  const double scale = 1.0 / (static_cast<double>(tw) * th);
  scaled_symbol_.resize(symbol_.size());
  for (std::size_t k = 0; k < symbol_.size(); ++k) scaled_symbol_[k] = symbol_[k] * scale;
}

ConvOperator build(const KernelSpec& spec) {
  const GridSpec& g = spec.grid;
  const bool mirror = spec.boundary == Boundary::mirror;
  const int tw = mirror ? 2 * g.width() : g.width();
  const int th = mirror ? 2 * g.height() : g.height();
  const double lx = mirror ? 2.0 * g.length_x() : g.length_x();
  const double ly = mirror ? 2.0 * g.length_y() : g.length_y();

  std::vector<double> symbol = std::visit(
      [&](const auto& kind) -> std::vector<double> {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, HeatKernel>) {
          require_positive(kind.tau, "tau");
          return heat_symbol(kind.tau, tw, th, lx, ly);
        } else if constexpr (std::is_same_v<K, GaussianFilter>) {
          require_positive(kind.sigma, "sigma");
          return spatial_symbol(gaussian_weights(kind.sigma, tw, th), tw, th);
        } else {
          require_positive(kind.rho, "rho");
          return spatial_symbol(disk_weights(kind.rho, tw, th, g.pixel_area()), tw, th);
        }
      },
      spec.kind);
  return ConvOperator(spec, tw, th, std::move(symbol));
}

ScalarField convolve(const ConvOperator& op, const ScalarField& field) {
  if (!(field.grid() == op.grid())) {
    throw std::invalid_argument("convolve: field grid does not match the operator's grid");
  }
  const int w = op.grid().width();
  const int h = op.grid().height();
  const int tw = op.transform_width();
  const int th = op.transform_height();
  const std::size_t n_real = static_cast<std::size_t>(tw) * th;
  const std::size_t n_complex = static_cast<std::size_t>(tw / 2 + 1) * th;

  const PlanPair& plans = plans_for(tw, th);
  Workspace& ws = thread_workspace();
  ws.reserve(n_real, n_complex);
  double* real = ws.real.get();
  const auto src = field.values();

  if (tw == w) {
    std::copy(src.begin(), src.end(), real);
  } else {
    // Even extension: the 2w x 2h tile is symmetric about both image borders.
    for (int row = 0; row < th; ++row) {
      const int sr = row < h ? row : th - 1 - row;
      for (int col = 0; col < tw; ++col) {
        const int sc = col < w ? col : tw - 1 - col;
        real[static_cast<std::size_t>(row) * tw + col] = src[static_cast<std::size_t>(sr) * w + sc];
      }
    }
  }

  fftw_execute_dft_r2c(plans.forward, real, ws.spectrum.get());
  simd::active_kernels().scale_spectrum(reinterpret_cast<std::complex<double>*>(ws.spectrum.get()),
                                        op.scaled_symbol_.data(), n_complex);
  fftw_execute_dft_c2r(plans.backward, ws.spectrum.get(), real);

  std::vector<double> out(field.size());
  for (int row = 0; row < h; ++row) {
    std::copy_n(real + static_cast<std::size_t>(row) * tw, w,
                out.begin() + static_cast<std::ptrdiff_t>(row) * w);
  }
  return ScalarField(field.grid(), std::move(out));
}

KernelCache::Key KernelCache::key_of(const KernelSpec& spec) {
  const double param = std::visit(
      [](const auto& kind) -> double {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, HeatKernel>) return kind.tau;
        else if constexpr (std::is_same_v<K, GaussianFilter>) return kind.sigma;
        else return kind.rho;
      },
      spec.kind);
  return {spec.kind.index(), param,           spec.grid.width(),
          spec.grid.height(), spec.grid.length_x(), spec.grid.length_y(),
          static_cast<int>(spec.boundary)};
}

std::shared_ptr<const ConvOperator> KernelCache::get(const KernelSpec& spec) {
  const Key key = key_of(spec);
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
  }
  auto op = std::make_shared<const ConvOperator>(build(spec));
  std::lock_guard lock(mutex_);
  return entries_.emplace(key, std::move(op)).first->second;
}

std::size_t KernelCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

KernelCache& default_kernel_cache() {
  static KernelCache cache;
  return cache;
}

}  // namespace ictm

// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include "ictm/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ictm/error.hpp"
#include "ictm/simd.hpp"

namespace ictm {
namespace {

const simd::KernelTable& kernels() { return simd::active_kernels(); }

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) require(std::isfinite(x), std::string(what) + " must be finite");
}

ScalarField checked_field(const GridSpec& grid, std::vector<double> values, const char* what) {
  const auto bad = std::find_if(values.begin(), values.end(),
                                [](double v) { return !std::isfinite(v); });
  if (bad != values.end()) {
    throw NumericalError(std::string(what) + " became non-finite at pixel " +
                         std::to_string(bad - values.begin()));
  }
  return ScalarField(grid, std::move(values));
}

double checked_scalar(double v, const char* what, int phase) {
  if (!std::isfinite(v)) {
    throw NumericalError(std::string(what) + " for phase " + std::to_string(phase) +
                         " is not finite");
  }
  return v;
}

void validate_lif(const LifParams& p, int n) {
  require(p.window != nullptr, "LIF: missing Gaussian window");
  require(static_cast<int>(p.c_fields.size()) == n, "LIF: expected one fitting function per phase");
  require(static_cast<int>(p.mu.size()) == n, "LIF: expected one mu per phase");
  require(p.sigma > 0.0, "LIF: sigma must be positive");
  require(p.epsilon > 0.0 && std::isfinite(p.epsilon), "LIF: epsilon must be positive");
  for (double m : p.mu) require(m > 0.0 && std::isfinite(m), "LIF: mu_i must be positive");
  for (const ScalarField& c : p.c_fields) {
    require(c.grid() == p.window->grid(), "LIF: fitting function grid differs from the window's");
  }
}

int phases_of(const FidelityModel::Params& params) {
  return std::visit(
      [](const auto& p) -> int {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, CvParams>) return static_cast<int>(p.c.size());
        else if constexpr (std::is_same_v<P, LifParams>) return static_cast<int>(p.c_fields.size());
        else if constexpr (std::is_same_v<P, LgifParams>) return static_cast<int>(p.global_c.size());
        else return static_cast<int>(p.c.size());
      },
      params);
}

void check_grid(const FidelityModel& model, const ScalarField& image) {
  const ConvOperator* op = nullptr;
  switch (model.kind()) {
    case ModelKind::lif: op = model.as<LifParams>().window.get(); break;
    case ModelKind::lgif: op = model.as<LgifParams>().lif.window.get(); break;
    case ModelKind::lsac: op = model.as<LsacParams>().disk.get(); break;
    case ModelKind::cv: break;
  }
  if (op != nullptr && !(op->grid() == image.grid())) {
    throw std::invalid_argument("model kernel grid does not match the image grid");
  }
}

void check_labels(const FidelityModel& model, const ScalarField& image, const LabelField& labels) {
  if (!(labels.grid() == image.grid())) {
    throw std::invalid_argument("label field grid does not match the image grid");
  }
  if (labels.num_phases() != model.num_phases()) {
    throw std::invalid_argument("label field has " + std::to_string(labels.num_phases()) +
                                " phases, model has " + std::to_string(model.num_phases()));
  }
  check_grid(model, image);
}

ScalarField square(const ScalarField& field) {
  std::vector<double> out(field.size());
  const auto v = field.values();
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return x * x; });
  return ScalarField(field.grid(), std::move(out));
}

ScalarField product(const ScalarField& a, const ScalarField& b) {
  std::vector<double> out(a.size());
  const auto va = a.values();
  const auto vb = b.values();
  std::transform(va.begin(), va.end(), vb.begin(), out.begin(), std::multiplies<>());
  return ScalarField(a.grid(), std::move(out));
}

// Region means; empty phases keep previous.
std::vector<double> region_means(const ScalarField& image, const LabelField& labels,
                                 std::vector<double> previous) {
  const auto counts = labels.phase_counts();
  for (int i = 0; i < labels.num_phases(); ++i) {
    if (counts[i] == 0) continue;
    const double total = kernels().masked_sum(image.values().data(), labels.labels().data(),
                                              static_cast<std::uint8_t>(i), image.size());
    previous[i] = checked_scalar(total / static_cast<double>(counts[i]), "region mean", i);
  }
  return previous;
}

std::vector<ScalarField> fitting_functions(const LifParams& p, const ScalarField& image,
                                           const LabelField& labels) {
  std::vector<ScalarField> out;
  out.reserve(labels.num_phases());
  for (int i = 0; i < labels.num_phases(); ++i) {
    const ScalarField u = indicator(labels, i);
    const ScalarField weighted = convolve(*p.window, product(u, image));
    const ScalarField mass = convolve(*p.window, u);
    std::vector<double> c(image.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
      c[k] = (weighted[k] + p.epsilon) / (mass[k] + p.epsilon);
    }
    out.push_back(checked_field(image.grid(), std::move(c), "LIF fitting function"));
  }
  return out;
}

LifParams updated_lif(const LifParams& p, const ScalarField& image, const LabelField& labels) {
  LifParams next = p;
  next.c_fields = fitting_functions(p, image, labels);
  return next;
}

ScalarField lif_potential(const LifParams& p, const ScalarField& image, int phase) {
  const ScalarField& c = p.c_fields[phase];
  const ScalarField gc = convolve(*p.window, c);
  const ScalarField gc2 = convolve(*p.window, square(c));
  std::vector<double> out(image.size());
  kernels().local_fit(out.data(), gc2.values().data(), gc.values().data(), image.values().data(),
                      p.window->mass(), p.mu[phase], out.size());
  return ScalarField(image.grid(), std::move(out));
}

ScalarField cv_potential(double c, const ScalarField& image) {
  std::vector<double> out(image.size());
  kernels().squared_difference(out.data(), image.values().data(), c, out.size());
  return ScalarField(image.grid(), std::move(out));
}

ScalarField lgif_potential(const LgifParams& p, const ScalarField& image, int phase) {
  std::vector<double> global(image.size());
  kernels().squared_difference(global.data(), image.values().data(), p.global_c[phase],
                               global.size());
  for (double& g : global) g *= p.omega;
  const ScalarField local = lif_potential(p.lif, image, phase);
  std::vector<double> out(image.size());
  kernels().add_scaled(out.data(), global.data(), local.values().data(), 1.0 - p.omega,
                       out.size());
  return ScalarField(image.grid(), std::move(out));
}

// Phase-independent pieces of the LSAC energy.
struct LsacMoments {
  ScalarField disk_bias;     // I * b
  ScalarField disk_bias_sq;  // I * b^2
  double disk_mass;          // I * 1
};

LsacMoments lsac_moments(const LsacParams& p) {
  return {convolve(*p.disk, p.bias), convolve(*p.disk, square(p.bias)), p.disk->mass()};
}

ScalarField lsac_potential(const LsacParams& p, const LsacMoments& m, const ScalarField& image,
                           int phase) {
  const double c = p.c[phase];
  const double nu = p.nu[phase];
  const double log_term = m.disk_mass * std::log(nu);
  const double inv = 1.0 / (2.0 * nu * nu);
  std::vector<double> out(image.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double f = image[k];
    const double quad = f * f * m.disk_mass - 2.0 * f * c * m.disk_bias[k] +
                        c * c * m.disk_bias_sq[k];
    out[k] = log_term + quad * inv;
  }
  return ScalarField(image.grid(), std::move(out));
}

LsacParams updated_lsac(const LsacParams& p, const ScalarField& image, const LabelField& labels) {
  const auto& kt = kernels();
  const std::size_t size = image.size();
  const std::uint8_t* lab = labels.labels().data();
  const double* f = image.values().data();
  const LsacMoments m = lsac_moments(p);
  const auto counts = labels.phase_counts();
  const int n = labels.num_phases();

  LsacParams next = p;

  // C_i from b^{k-1}
  const ScalarField fib = product(image, m.disk_bias);
  for (int i = 0; i < n; ++i) {
    if (counts[i] == 0) continue;
    const auto phase = static_cast<std::uint8_t>(i);
    const double num = kt.masked_sum(fib.values().data(), lab, phase, size);
    const double den = kt.masked_sum(m.disk_bias_sq.values().data(), lab, phase, size);
    if (den > 0.0) next.c[i] = checked_scalar(num / den, "LSAC constant C", i);
  }

  // nu_i from the fresh C_i and b^{k-1}; clamped at the floor, which is the
  // constrained minimiser because the energy is unimodal in nu.
  for (int i = 0; i < n; ++i) {
    if (counts[i] == 0) continue;
    const auto phase = static_cast<std::uint8_t>(i);
    const double c = next.c[i];
    double residual = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      if (lab[k] != phase) continue;
      residual += f[k] * f[k] * m.disk_mass - 2.0 * f[k] * c * m.disk_bias[k] +
                  c * c * m.disk_bias_sq[k];
    }
    const double weight = m.disk_mass * static_cast<double>(counts[i]);
    const double variance = std::max(residual / weight, 0.0);
    next.nu[i] = std::max(checked_scalar(std::sqrt(variance), "LSAC noise level", i), p.nu_floor);
  }

  // b from the fresh C_i, nu_i.
  std::vector<double> num(size, 0.0);
  std::vector<double> den(size, 0.0);
  for (int i = 0; i < n; ++i) {
    if (counts[i] == 0) continue;
    const ScalarField u = indicator(labels, i);
    const ScalarField du = convolve(*p.disk, u);
    const ScalarField duf = convolve(*p.disk, product(u, image));
    const double nu2 = next.nu[i] * next.nu[i];
    const double a = next.c[i] / nu2;
    const double b = next.c[i] * next.c[i] / nu2;
    kt.add_scaled(num.data(), num.data(), duf.values().data(), a, size);
    kt.add_scaled(den.data(), den.data(), du.values().data(), b, size);
  }
  std::vector<double> bias(size);
  for (std::size_t k = 0; k < size; ++k) bias[k] = num[k] / (den[k] + kBiasRegularization);
  next.bias = checked_field(image.grid(), std::move(bias), "LSAC bias field");
  return next;
}

}  // namespace

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::cv: return "cv";
    case ModelKind::lif: return "lif";
    case ModelKind::lgif: return "lgif";
    case ModelKind::lsac: return "lsac";
  }
  return "unknown";
}

FidelityModel::FidelityModel(Params params)
    : params_(std::move(params)), num_phases_(phases_of(params_)) {
  const int n = num_phases_;
  require(n >= 2 && n <= LabelField::kMaxPhases, "model needs between 2 and 255 phases");
  std::visit(
      [n](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, CvParams>) {
          require_finite(p.c, "CV constants");
        } else if constexpr (std::is_same_v<P, LifParams>) {
          validate_lif(p, n);
        } else if constexpr (std::is_same_v<P, LgifParams>) {
          validate_lif(p.lif, n);
          require_finite(p.global_c, "LGIF global constants");
          require(p.omega >= 0.0 && p.omega <= 1.0, "LGIF: omega must lie in [0, 1]");
        } else {
          require(p.disk != nullptr, "LSAC: missing disk kernel");
          require(static_cast<int>(p.nu.size()) == n, "LSAC: expected one nu per phase");
          require(p.nu_floor > 0.0, "LSAC: nu_floor must be positive");
          require(p.rho > 0.0, "LSAC: rho must be positive");
          require_finite(p.c, "LSAC constants");
          for (double nu : p.nu) {
            require(std::isfinite(nu) && nu >= p.nu_floor, "LSAC: nu_i must be >= nu_floor");
          }
          require(p.bias.grid() == p.disk->grid(), "LSAC: bias grid differs from the disk's");
        }
      },
      params_);
}

FidelityModel FidelityModel::cv(int num_phases) {
  require(num_phases >= 2, "model needs at least 2 phases");
  return FidelityModel(CvParams{std::vector<double>(num_phases, 0.0)});
}

FidelityModel FidelityModel::lif(const GridSpec& grid, int num_phases, double sigma,
                                 std::vector<double> mu, double epsilon, Boundary boundary) {
  require(num_phases >= 2, "model needs at least 2 phases");
  if (mu.size() == 1) mu.assign(num_phases, mu.front());
  LifParams p;
  p.c_fields.assign(num_phases, ScalarField::constant(grid, 0.0));
  p.sigma = sigma;
  p.mu = std::move(mu);
  p.epsilon = epsilon;
  p.window = default_kernel_cache().get({GaussianFilter{sigma}, grid, boundary});
  return FidelityModel(std::move(p));
}

FidelityModel FidelityModel::lgif(const GridSpec& grid, int num_phases, double sigma,
                                  std::vector<double> mu, double omega, double epsilon,
                                  Boundary boundary) {
  FidelityModel local = lif(grid, num_phases, sigma, std::move(mu), epsilon, boundary);
  return FidelityModel(
      LgifParams{local.as<LifParams>(), std::vector<double>(num_phases, 0.0), omega});
}

FidelityModel FidelityModel::lsac(const GridSpec& grid, int num_phases, double rho,
                                  double nu_floor, Boundary boundary) {
  require(num_phases >= 2, "model needs at least 2 phases");
  require(nu_floor > 0.0 && nu_floor <= 1.0, "LSAC: nu_floor must lie in (0, 1]");
  return FidelityModel(LsacParams{std::vector<double>(num_phases, 0.0),
                                  std::vector<double>(num_phases, 1.0),
                                  ScalarField::constant(grid, 1.0), rho, nu_floor,
                                  default_kernel_cache().get({DiskKernel{rho}, grid, boundary})});
}

FidelityModel update_theta(const FidelityModel& model, const ScalarField& image,
                           const LabelField& labels) {
  check_labels(model, image, labels);
  return std::visit(
      [&](const auto& p) -> FidelityModel {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, CvParams>) {
          return FidelityModel(CvParams{region_means(image, labels, p.c)});
        } else if constexpr (std::is_same_v<P, LifParams>) {
          return FidelityModel(updated_lif(p, image, labels));
        } else if constexpr (std::is_same_v<P, LgifParams>) {
          return FidelityModel(LgifParams{updated_lif(p.lif, image, labels),
                                          region_means(image, labels, p.global_c), p.omega});
        } else {
          return FidelityModel(updated_lsac(p, image, labels));
        }
      },
      model.params());
}

ScalarField potential(const FidelityModel& model, const ScalarField& image, int phase) {
  if (phase < 0 || phase >= model.num_phases()) {
    throw std::invalid_argument("phase index " + std::to_string(phase) + " outside [0, " +
                                std::to_string(model.num_phases()) + ")");
  }
  check_grid(model, image);
  return std::visit(
      [&](const auto& p) -> ScalarField {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, CvParams>) {
          return cv_potential(p.c[phase], image);
        } else if constexpr (std::is_same_v<P, LifParams>) {
          return lif_potential(p, image, phase);
        } else if constexpr (std::is_same_v<P, LgifParams>) {
          return lgif_potential(p, image, phase);
        } else {
          return lsac_potential(p, lsac_moments(p), image, phase);
        }
      },
      model.params());
}

std::vector<ScalarField> potentials(const FidelityModel& model, const ScalarField& image) {
  check_grid(model, image);
  std::vector<ScalarField> out;
  out.reserve(model.num_phases());
  if (model.kind() == ModelKind::lsac) {
    const auto& p = model.as<LsacParams>();
    const LsacMoments m = lsac_moments(p);
    for (int i = 0; i < model.num_phases(); ++i) out.push_back(lsac_potential(p, m, image, i));
  } else {
    for (int i = 0; i < model.num_phases(); ++i) out.push_back(potential(model, image, i));
  }
  return out;
}

double fidelity_energy(const std::vector<ScalarField>& potentials, const LabelField& labels) {
  const auto& kt = kernels();
  double total = 0.0;
  for (std::size_t i = 0; i < potentials.size(); ++i) {
    total += kt.masked_sum(potentials[i].values().data(), labels.labels().data(),
                           static_cast<std::uint8_t>(i), labels.size());
  }
  return total * labels.grid().pixel_area();
}

double fidelity_energy(const FidelityModel& model, const ScalarField& image,
                       const LabelField& labels) {
  check_labels(model, image, labels);
  return fidelity_energy(potentials(model, image), labels);
}

}  // namespace ictm

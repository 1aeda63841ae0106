// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string_view>
#include <variant>
#include <vector>

#include "ictm/grid.hpp"
#include "ictm/kernel.hpp"

namespace ictm {

inline constexpr double kDefaultLifEpsilon = 1e-6;
inline constexpr double kDefaultNuFloor = 1e-4;
// Added to the denominator of the bias-field update.
inline constexpr double kBiasRegularization = 1e-8;

// Piecewise-constant fit: F_i = |C_i - f|^2.
struct CvParams {
  std::vector<double> c;
};

// Local intensity fitting with fitting functions C_i(x):
//   F_i(y) = mu_i * sum_x G(x - y) |C_i(x) - f(y)|^2
// where G is the GaussianFilter of width sigma (pixels). C_i is updated as
//   C_i = (G*(u_i f) + eps) / (G*u_i + eps).
struct LifParams {
  std::vector<ScalarField> c_fields;
  double sigma = 3.0;
  std::vector<double> mu;
  double epsilon = kDefaultLifEpsilon;
  std::shared_ptr<const ConvOperator> window;
};

// Convex blend omega * CV + (1 - omega) * LIF with global constants I_i.
struct LgifParams {
  LifParams lif;
  std::vector<double> global_c;
  double omega = 0.5;
};

// Local Gaussian statistics under a multiplicative bias field b:
//   F_i(x) = sum_y I_rho(x - y) [log nu_i + |f(x) - b(y) C_i|^2 / (2 nu_i^2)] dA
// with I_rho the DiskKernel of radius rho (pixels). nu_i >= nu_floor.
struct LsacParams {
  std::vector<double> c;
  std::vector<double> nu;
  ScalarField bias;
  double rho = 15.0;
  double nu_floor = kDefaultNuFloor;
  std::shared_ptr<const ConvOperator> disk;
};

enum class ModelKind { cv, lif, lgif, lsac };

std::string_view model_name(ModelKind kind);

// The fidelity energy together with its parameter set Theta. Construction
// validates every admissibility constraint (positive mu, nu >= nu_floor,
// omega in [0, 1], consistent grids and phase counts) and throws
// std::invalid_argument otherwise.
class FidelityModel {
 public:
  using Params = std::variant<CvParams, LifParams, LgifParams, LsacParams>;

  explicit FidelityModel(Params params);

  static FidelityModel cv(int num_phases);
  static FidelityModel lif(const GridSpec& grid, int num_phases, double sigma,
                           std::vector<double> mu, double epsilon = kDefaultLifEpsilon,
                           Boundary boundary = Boundary::periodic);
  static FidelityModel lgif(const GridSpec& grid, int num_phases, double sigma,
                            std::vector<double> mu, double omega,
                            double epsilon = kDefaultLifEpsilon,
                            Boundary boundary = Boundary::periodic);
  // Starts from b = 1, nu = 1, C = 0.
  static FidelityModel lsac(const GridSpec& grid, int num_phases, double rho,
                            double nu_floor = kDefaultNuFloor,
                            Boundary boundary = Boundary::periodic);

  ModelKind kind() const noexcept { return static_cast<ModelKind>(params_.index()); }
  std::string_view name() const noexcept { return model_name(kind()); }
  int num_phases() const noexcept { return num_phases_; }
  const Params& params() const noexcept { return params_; }

  template <typename T>
  const T& as() const& {
    return std::get<T>(params_);
  }
  template <typename T>
  const T& as() const&& = delete;

 private:
  Params params_;
  int num_phases_;
};

// One coordinate-descent step over Theta with the partition fixed. CV and LIF
// parts are closed-form minimisers; LSAC performs a single Gauss-Seidel sweep
// C -> nu -> b. Phases with no pixels keep their previous constants.
// Throws NumericalError if a non-finite value appears.
FidelityModel update_theta(const FidelityModel& model, const ScalarField& image,
                           const LabelField& labels);

// Pointwise fidelity potential F_i.
ScalarField potential(const FidelityModel& model, const ScalarField& image, int phase);

// F_0 .. F_{n-1}; shares the convolutions that do not depend on the phase.
std::vector<ScalarField> potentials(const FidelityModel& model, const ScalarField& image);

// E_f = sum_i sum_x u_i(x) F_i(x) dA
double fidelity_energy(const FidelityModel& model, const ScalarField& image,
                       const LabelField& labels);
double fidelity_energy(const std::vector<ScalarField>& potentials, const LabelField& labels);

}  // namespace ictm

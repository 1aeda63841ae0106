// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "ictm/app/app.hpp"
#include "ictm/error.hpp"
#include "ictm/metrics.hpp"
#include "ictm/solver.hpp"
#include "oracles.hpp"

using namespace ictm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::shared_ptr<const ConvOperator> heat_for(const GridSpec& g, double tau) {
  return default_kernel_cache().get({HeatKernel{tau}, g});
}

// Smooth random image: a few random Fourier modes plus noise.
ScalarField random_image(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> v(g.pixel_count(), 0.0);
  for (int m = 0; m < 4; ++m) {
    const double kx = std::floor(u(rng) * 4), ky = std::floor(u(rng) * 4), ph = 6.28 * u(rng);
    const double a = u(rng);
    for (int row = 0; row < g.height(); ++row)
      for (int col = 0; col < g.width(); ++col)
        v[row * g.width() + col] += a * std::sin(kx * g.x_at(col) + ky * g.y_at(row) + ph);
  }
  for (double& x : v) x = 0.5 + 0.25 * x + noise(rng);
  return ScalarField(g, v);
}

Outcome energy_monotonicity() {
  const auto start = std::chrono::steady_clock::now();
  const GridSpec g = GridSpec::for_image(32, 32);
  std::mt19937_64 rng(2024);
  const char* names[] = {"cv", "lif", "lgif", "lsac"};
  int runs = 0, violations = 0, iterations = 0;
  std::string first;
  for (int model = 0; model < 4; ++model) {
    for (int inst = 0; inst < 50; ++inst) {
      const ScalarField f = random_image(g, rng);
      const int n = 2 + static_cast<int>(rng() % 3);
      const LabelField init = oracle::random_full_labels(g, n, rng);
      const double lambda = std::uniform_real_distribution<double>(0.005, 0.2)(rng);
      for (double tau : {1e-4, 1e-3, 1e-2, 1e-1}) {
        SolverParams p;
        p.tau = tau;
        p.lambda = lambda;
        p.max_iters = 300;
        p.energy_check = false;  // audited independently below
        const FidelityModel base =
            model == 0   ? FidelityModel::cv(n)
            : model == 1 ? FidelityModel::lif(g, n, 2.0, {1.0})
            : model == 2 ? FidelityModel::lgif(g, n, 2.0, {1.0}, 0.5)
                         : FidelityModel::lsac(g, n, 5.0);
        const auto heat = heat_for(g, tau);
        // Recompute E(u^k, Theta^k) along the same iteration from the
        // public steps and check it never rises.
        LabelField labels = init;
        FidelityModel theta = update_theta(base, f, labels);
        double prev = total_energy(theta, f, labels, p, *heat).total;
        for (int k = 0; k < p.max_iters; ++k) {
          LabelField next = threshold(compute_phi(theta, f, labels, p, *heat));
          const bool done = next == labels;
          labels = std::move(next);
          theta = update_theta(theta, f, labels);
          const double e = total_energy(theta, f, labels, p, *heat).total;
          if (e > prev + kEnergySlack * (1 + std::abs(prev))) {
            if (violations++ == 0) {
              std::ostringstream m;
              m.precision(17);
              m << names[model] << " tau=" << tau << " iter " << k + 1 << ": " << prev << " -> " << e;
              first = m.str();
            }
          }
          prev = e;
          ++iterations;
          if (done) break;
        }
        // The library loop with its own audit must agree.
        p.energy_check = true;
        try {
          solve(base, f, init, p);
        } catch (const InvariantViolation& e) {
          if (violations++ == 0) first = e.what();
        }
        ++runs;
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << runs << " runs, " << iterations << " iterations, " << violations << " violations, "
    << secs << " s";
  if (!first.empty()) d << "; first: " << first;
  return {violations == 0 && secs < 60.0, d.str()};
}

Outcome thresholding_oracle() {
  const GridSpec g = GridSpec::for_image(3, 3);
  std::mt19937_64 rng(7);
  int failures = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const ScalarField f = oracle::random_field(g, rng);
    const LabelField lf = oracle::random_labels(g, 2, rng);
    SolverParams p;
    p.tau = std::uniform_real_distribution<double>(0.005, 0.5)(rng);
    p.lambda = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const FidelityModel m = update_theta(
        inst % 2 == 0 ? FidelityModel::cv(2) : FidelityModel::lsac(g, 2, 1.5), f, lf);
    const PhiField phi = compute_phi(m, f, lf, p, *heat_for(g, p.tau));
    const LabelField t = threshold(phi);
    auto objective = [&](auto label_of) {
      double s = 0;
      for (std::size_t k = 0; k < 9; ++k) s += phi[label_of(k)][k];
      return s;
    };
    double best = 1e300;
    for (unsigned code = 0; code < 512; ++code) {
      best = std::min(best, objective([code](std::size_t k) { return (code >> k) & 1u; }));
    }
    if (objective([&](std::size_t k) { return t[k]; }) > best) ++failures;
  }
  return {failures == 0, "200 instances, " + std::to_string(failures) + " failures"};
}

Outcome perimeter_consistency() {
  const GridSpec g = GridSpec::for_image(512, 512);
  std::vector<std::uint8_t> v(g.pixel_count());
  for (int row = 0; row < 512; ++row)
    for (int col = 0; col < 512; ++col)
      v[row * 512 + col] = g.x_at(col) * g.x_at(col) + g.y_at(row) * g.y_at(row) < 1.0;
  const LabelField disk(g, 2, v);
  std::ostringstream d;
  double last = 1e300;
  bool monotone = true;
  for (double tau : {0.02, 0.01, 0.005}) {
    const double err =
        std::abs(perimeter_estimate(disk, 1, tau, *heat_for(g, tau)) - 2 * std::numbers::pi) /
        (2 * std::numbers::pi);
    d << "tau=" << tau << " err=" << err * 100 << "% ";
    monotone = monotone && err < last;
    last = err;
  }
  return {monotone && last < 0.03, d.str()};
}

Outcome cv_recovery() {
  std::ostringstream d;
  bool ok = true;
  // 8-bit intensity scale, as for a raw image file.
  for (double radius : {1.5, 1.0, 2.2}) {
    app::TwoLevelParams tp;
    tp.shape = "disk";
    tp.radius = radius;
    tp.low = 0;
    tp.high = 255;
    const app::Synthetic s = app::synth_two_level(tp);
    app::InitSpec init;
    init.kind = "checkerboard";
    init.block = 8;
    SolverParams p;
    p.tau = 0.02;
    p.lambda = 0.05;
    const SolveResult r = solve(FidelityModel::cv(2), s.image,
                                app::initialize(init, s.image.grid(), 2, 0), p);
    const SegScore js = jaccard(r.labels, s.truth);
    const int iters = static_cast<int>(r.trace.records.size());
    ok = ok && r.trace.converged && iters <= 20 && js.mean == 1.0;
    d << "disk r=" << radius << ": " << iters << " iterations, JS " << js.mean << "; ";
  }
  return {ok, d.str()};
}

Outcome lsac_bias() {
  std::ostringstream d;
  bool ok = true;
  double js_sum = 0;
  for (int level = 0; level < 5; ++level) {
    app::StarParams sp;
    sp.bias = app::bias_level(level, 5, 0.5);
    sp.noise = 0.02;
    sp.seed = 100 + level;
    const app::Synthetic s = app::synth_star(sp);
    app::InitSpec init;
    init.kind = "circles";
    init.radius = sp.radius;
    SolverParams p;
    p.tau = 0.001;
    p.lambda = 0.1;
    const FidelityModel m = FidelityModel::lsac(s.image.grid(), 2, 15.0);
    const SolveResult r =
        solve(m, s.image, app::initialize(init, s.image.grid(), 2, 0), p);
    const SegScore js = jaccard(r.labels, s.truth);
    const int iters = static_cast<int>(r.trace.records.size());
    ok = ok && r.trace.converged && iters <= 15;
    js_sum += js.mean;
    d << "b=" << sp.bias << ": " << iters << " it, JS " << js.mean << "; ";
  }
  ok = ok && js_sum / 5 >= 0.99;
  d << "mean JS " << js_sum / 5;
  return {ok, d.str()};
}

Outcome model_reduction() {
  std::mt19937_64 rng(31);
  const GridSpec g = GridSpec::for_image(24, 20);
  int mismatches = 0;
  double worst_mle = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const ScalarField f = oracle::random_field(g, rng);
    const int n = 2 + inst % 3;
    const LabelField lf = oracle::random_full_labels(g, n, rng);
    const FidelityModel one = update_theta(FidelityModel::lgif(g, n, 2.0, {1.0}, 1.0), f, lf);
    const FidelityModel zero = update_theta(FidelityModel::lgif(g, n, 2.0, {1.0}, 0.0), f, lf);
    const FidelityModel cv = update_theta(FidelityModel::cv(n), f, lf);
    const FidelityModel lif = update_theta(FidelityModel::lif(g, n, 2.0, {1.0}), f, lf);
    for (int i = 0; i < n; ++i) {
      const ScalarField a = potential(one, f, i), b = potential(cv, f, i);
      const ScalarField c = potential(zero, f, i), e = potential(lif, f, i);
      for (std::size_t k = 0; k < f.size(); ++k) mismatches += (a[k] != b[k]) + (c[k] != e[k]);
    }
    const FidelityModel fitted = update_theta(FidelityModel::lsac(g, n, 1e4), f, lf);
    const LsacParams& p = fitted.as<LsacParams>();
    for (int i = 0; i < n; ++i) {
      double s = 0, s2 = 0;
      int count = 0;
      for (std::size_t k = 0; k < f.size(); ++k)
        if (lf[k] == i) s += f[k], ++count;
      const double mean = s / count;
      for (std::size_t k = 0; k < f.size(); ++k)
        if (lf[k] == i) s2 += (f[k] - mean) * (f[k] - mean);
      worst_mle = std::max({worst_mle, oracle::rel_err(p.c[i], mean),
                            oracle::rel_err(p.nu[i], std::sqrt(s2 / count))});
    }
  }
  std::ostringstream d;
  d << mismatches << " pointwise mismatches, worst LSAC MLE rel err " << worst_mle;
  return {mismatches == 0 && worst_mle <= 1e-8, d.str()};
}

Outcome brute_force_energy() {
  std::mt19937_64 rng(41);
  // 8x8 pixels with tau/h^2 = 3, so the sampled continuous heat kernel is
  // resolved to well below the tolerance.
  const GridSpec g(8, 8, 0.8, 0.8);
  double worst[3] = {0, 0, 0};
  for (int inst = 0; inst < 20; ++inst) {
    const ScalarField f = oracle::random_field(g, rng);
    const int n = 2 + inst % 2;
    const LabelField lf = oracle::random_full_labels(g, n, rng);
    SolverParams p;
    p.tau = 0.03;
    p.lambda = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
    const auto heat = heat_for(g, p.tau);
    const FidelityModel models[3] = {
        update_theta(FidelityModel::cv(n), f, lf),
        update_theta(FidelityModel::lsac(g, n, 2.5), f, lf),
        update_theta(FidelityModel::lif(g, n, 1.0, {1.0}), f, lf)};
    for (int m = 0; m < 3; ++m) {
      const double fast = total_energy(models[m], f, lf, p, *heat).total;
      const double dense = oracle::dense_energy(models[m], f, lf, p).total;
      worst[m] = std::max(worst[m], oracle::rel_err(fast, dense));
    }
  }
  std::ostringstream d;
  d << "worst rel err cv " << worst[0] << ", lsac " << worst[1] << ", lif " << worst[2];
  return {worst[0] <= 1e-6 && worst[1] <= 1e-6 && worst[2] <= 1e-5, d.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("ictm_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  app::StarParams sp;
  sp.size = 96;
  sp.bias = 0.3;
  sp.noise = 0.03;
  sp.seed = 9;
  app::write_synthetic(dir / "star", app::synth_star(sp));
  std::ostringstream d;
  bool ok = true;
  for (const char* model : {"lsac", "lgif"}) {
    app::RunConfig c;
    c.input = dir / "star" / "image.png";
    c.ground_truth = dir / "star" / "truth.png";
    c.model = model;
    c.rho = 10;
    c.lambda = 0.1;
    c.tau = 0.002;
    c.init.kind = "random";
    c.seed = 1234;
    c.max_iters = 60;
    c.energy_check = true;
    std::string labels[2], trace[2];
    int codes[2];
    for (int k = 0; k < 2; ++k) {
      c.output = dir / (std::string(model) + std::to_string(k));
      codes[k] = app::run(c);
      labels[k] = slurp(c.output / "labels.png");
      trace[k] = slurp(c.output / "trace.csv");
    }
    const bool same = codes[0] != app::kError && codes[0] == codes[1] && !labels[0].empty() &&
                      labels[0] == labels[1] && trace[0] == trace[1];
    ok = ok && same;
    d << model << ": exit " << codes[0] << "/" << codes[1] << (same ? " identical" : " DIFFER") << "; ";
  }
  fs::remove_all(dir);
  return {ok, d.str()};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"1 energy monotonicity", energy_monotonicity},
      {"2 thresholding optimality", thresholding_oracle},
      {"3 perimeter consistency", perimeter_consistency},
      {"4 cv exact recovery", cv_recovery},
      {"5 lsac bias robustness", lsac_bias},
      {"6 model reduction identities", model_reduction},
      {"7 brute-force energy", brute_force_energy},
      {"8 determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}

// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <png.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <set>
#include <sstream>
#include <unistd.h>
#include <sys/wait.h>

#include "ictm/app/app.hpp"
#include "ictm/metrics.hpp"

using namespace ictm;
using namespace ictm::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ictm_test_app_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Runs the CLI with stderr captured to a file; returns the exit status.
int run_cli(const std::string& args, const fs::path& err) {
  const std::string cmd = std::string(ICTM_CLI_PATH) + " " + args + " 2>" + err.string() + " >/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig two_level_config(const fs::path& dir) {
  write_synthetic(dir / "data", synth_two_level({}));
  RunConfig c;
  c.input = dir / "data" / "image.png";
  c.ground_truth = dir / "data" / "truth.png";
  c.model = "cv";
  c.tau = 0.02;
  c.lambda = 0.05;
  c.output = dir / "out";
  c.energy_check = true;
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = parse_config(R"(
# comment
[run]
input = "img/a.png"   # trailing comment
model = 'lsac'
n = 3
tau = 1e-3
lambda = 0.1
rho = 15
mu = [1, 2.5, 3]
init = "circles"
init_count = 4
init_radius = 0.5
energy_check = true
ground_truth = "truth.png"
seed = 42
boundary = "mirror"
)",
                                   "/data");
  CHECK(c.input == fs::path("/data/img/a.png"));
  CHECK(c.model == "lsac");
  CHECK(c.phases == 3);
  CHECK(c.tau == 1e-3);
  CHECK(c.mu == std::vector<double>{1, 2.5, 3});
  CHECK(c.init.kind == "circles");
  CHECK(c.init.count == 4);
  CHECK(c.energy_check);
  CHECK(c.ground_truth == fs::path("/data/truth.png"));
  CHECK(c.seed == 42);
  CHECK(c.boundary == Boundary::mirror);
  CHECK(c.solver_params().tau == 1e-3);
  CHECK(c.solver_params().boundary == Boundary::mirror);

  CHECK_THROWS_AS(parse_config("colour = 3"), UserError);
  CHECK_THROWS_AS(parse_config("tau = fast"), UserError);
  CHECK_THROWS_AS(parse_config("just words"), UserError);
  CHECK_THROWS_AS(parse_config("energy_check = maybe"), UserError);
  RunConfig o;
  apply_setting(o, "lambda", "0.25");
  CHECK(o.lambda == 0.25);
}

TEST_CASE("config builds models") {
  const GridSpec g = GridSpec::for_image(16, 16);
  RunConfig c;
  for (const char* name : {"cv", "lif", "lgif", "lsac"}) {
    c.model = name;
    CHECK(c.make_model(g).name() == name);
  }
  c.model = "snake";
  CHECK_THROWS_AS(c.make_model(g), UserError);
  c.model = "lif";
  c.sigma = -1;
  CHECK_THROWS_AS(c.make_model(g), UserError);
}

TEST_CASE("initializers") {
  const GridSpec g2 = GridSpec::for_image(2, 2);
  InitSpec spec;
  spec.kind = "checkerboard";
  spec.block = 1;
  const LabelField cb = initialize(spec, g2, 2, 0);
  CHECK(cb == LabelField(g2, 2, {0, 1, 1, 0}));

  const GridSpec g = GridSpec::for_image(64, 64);
  spec = {};
  spec.kind = "circles";
  spec.radius = 1.0;
  const LabelField circ = initialize(spec, g, 2, 0);
  for (int row = 0; row < 64; ++row)
    for (int col = 0; col < 64; ++col) {
      const double r2 = g.x_at(col) * g.x_at(col) + g.y_at(row) * g.y_at(row);
      CHECK(circ(col, row) == (r2 < 1.0 ? 1 : 0));
    }

  spec.count = 9;
  spec.radius = 0.5;
  const LabelField many = initialize(spec, g, 3, 0);
  CHECK(many.phase_counts()[1] > 0);
  CHECK(many.phase_counts()[2] > 0);
  spec.radius = 2.0;
  CHECK_THROWS_AS(initialize(spec, g, 2, 0), UserError);

  spec = {};
  spec.kind = "stripes";
  spec.stripe = 4;
  const LabelField st = initialize(spec, g, 3, 0);
  CHECK(st(0, 5) == 0);
  CHECK(st(4, 9) == 1);
  CHECK(st(12, 0) == 0);

  spec.kind = "random";
  CHECK(initialize(spec, g, 4, 7) == initialize(spec, g, 4, 7));
  CHECK_FALSE(initialize(spec, g, 4, 7) == initialize(spec, g, 4, 8));

  spec.kind = "blobs";
  CHECK_THROWS_AS(initialize(spec, g, 2, 0), UserError);
}

TEST_CASE("image round trips") {
  const fs::path dir = scratch("io");
  const GridSpec g = GridSpec::for_image(24, 16);
  std::vector<double> v(g.pixel_count());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(k % 17) / 16.0;
  save_image(dir / "a.png", ScalarField(g, v), 16);
  const ScalarField back = load_image(dir / "a.png", false);
  CHECK(back.grid() == g);
  for (std::size_t k = 0; k < v.size(); ++k) CHECK(back[k] == std::round(v[k] * 65535));
  save_image(dir / "b.png", ScalarField(g, v));
  const ScalarField eight = load_image(dir / "b.png", false);
  for (std::size_t k = 0; k < v.size(); ++k) CHECK(eight[k] == std::round(v[k] * 255));
  CHECK_THROWS_AS(save_image(dir / "c.png", ScalarField(g, v), 12), std::invalid_argument);

  std::vector<std::uint8_t> lv(g.pixel_count());
  for (std::size_t k = 0; k < lv.size(); ++k) lv[k] = static_cast<std::uint8_t>(k % 5);
  const LabelField lf(g, 5, lv);
  save_label_map(dir / "l.png", lf);
  CHECK(load_label_map(dir / "l.png", 5) == lf);
  CHECK(load_label_map(dir / "l.png").num_phases() == 5);

  save_overlay(dir / "o.png", ScalarField(g, v), lf);
  CHECK(fs::file_size(dir / "o.png") > 0);
}

TEST_CASE("8-bit grayscale and pgm input") {
  const fs::path dir = scratch("gray");
  std::string pgm = "P5\n# c\n256 256\n255\n";
  for (int k = 0; k < 256 * 256; ++k) pgm.push_back(static_cast<char>(k % 256));
  write_file(dir / "a.pgm", pgm);
  const ScalarField raw = load_image(dir / "a.pgm", false);
  CHECK(raw.grid().width() == 256);
  CHECK(raw[255] == 255.0);
  CHECK(raw[256] == 0.0);
  const ScalarField norm = load_image(dir / "a.pgm", true);
  CHECK(norm[255] == 1.0);
  CHECK(norm[0] == 0.0);
  write_file(dir / "b.pgm", "P2\n3 2\n10\n0 5 10\n10 5 0\n");
  const ScalarField ascii = load_image(dir / "b.pgm");
  CHECK(ascii[1] == 5.0);
  CHECK(ascii[3] == 10.0);
}

TEST_CASE("rgb input becomes the channel mean") {
  const fs::path dir = scratch("rgb");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = 4;
  img.height = 2;
  img.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> px(4 * 2 * 4);
  for (int k = 0; k < 8; ++k) {
    px[4 * k] = static_cast<std::uint8_t>(30 * k);
    px[4 * k + 1] = 90;
    px[4 * k + 2] = static_cast<std::uint8_t>(255 - 10 * k);
    px[4 * k + 3] = 128;
  }
  REQUIRE(png_image_write_to_file(&img, (dir / "c.png").c_str(), 0, px.data(), 0, nullptr));
  const ScalarField f = load_image(dir / "c.png", false);
  for (int k = 0; k < 8; ++k) CHECK(f[k] == doctest::Approx((30.0 * k + 90 + 255 - 10 * k) / 3));
}

TEST_CASE("bad image files name the path") {
  const fs::path dir = scratch("bad");
  const GridSpec g = GridSpec::for_image(32, 32);
  save_image(dir / "ok.png", ScalarField::constant(g, 0.5));
  const std::string bytes = slurp(dir / "ok.png");
  write_file(dir / "cut.png", bytes.substr(0, bytes.size() / 2));
  write_file(dir / "cut.pgm", "P5\n4 4\n255\nabc");
  for (const fs::path& p : {dir / "cut.png", dir / "cut.pgm", dir / "missing.png"}) {
    try {
      load_image(p);
      FAIL("expected an error for " << p);
    } catch (const UserError& e) {
      CHECK(std::string(e.what()).find(p.string()) != std::string::npos);
    }
  }
}

TEST_CASE("synthetic data") {
  StarParams sp;
  sp.size = 64;
  const Synthetic clean = synth_star(sp);
  std::set<double> levels(clean.image.values().begin(), clean.image.values().end());
  CHECK(levels == std::set<double>{sp.background, sp.foreground});
  for (std::size_t k = 0; k < clean.image.size(); ++k)
    CHECK(clean.image[k] == (clean.truth[k] == 1 ? sp.foreground : sp.background));

  sp.noise = 0.05;
  sp.seed = 3;
  const Synthetic noisy_a = synth_star(sp), noisy_b = synth_star(sp);
  CHECK(noisy_a.image[5] == noisy_b.image[5]);
  CHECK(noisy_a.image[5] != clean.image[5]);

  const ScalarField b = bias_field(GridSpec::for_image(64, 64), 0.4);
  double lo = 1e9, hi = -1e9;
  for (double v : b.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= 0.6 - 1e-12);
  CHECK(hi <= 1.4 + 1e-12);
  CHECK(hi - lo > 0.4);
  CHECK(bias_level(0, 5, 0.5) == 0.0);
  CHECK(bias_level(4, 5, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("run writes outputs and exits 0 on convergence") {
  const fs::path dir = scratch("run0");
  const RunConfig c = two_level_config(dir);
  CHECK(run(c) == kConverged);
  const auto metrics = nlohmann::json::parse(slurp(c.output / "metrics.json"));
  CHECK(metrics["model"] == "cv");
  CHECK(metrics["converged"] == true);
  CHECK(metrics["jaccard_mean"].get<double>() == 1.0);
  CHECK(metrics["n_phases"] == 2);
  for (const char* f : {"labels.png", "overlay.png", "trace.csv", "timing.log"}) CHECK(fs::exists(c.output / f));
  const std::string csv = slurp(c.output / "trace.csv");
  CHECK(csv.rfind("iter,e_total,e_fidelity,e_regularizer,changed_pixels,millis\n", 0) == 0);
}

TEST_CASE("run exits 2 at the iteration cap") {
  const fs::path dir = scratch("run2");
  RunConfig c = two_level_config(dir);
  c.max_iters = 1;
  CHECK(run(c) == kIterationCap);
  const std::string csv = slurp(c.output / "trace.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("run exits 1 on a missing input") {
  const fs::path dir = scratch("run1");
  write_file(dir / "c.toml", "input = \"nope.png\"\noutput = \"out\"\n");
  CHECK(run_cli("run " + (dir / "c.toml").string(), dir / "err.txt") == 1);
  CHECK(slurp(dir / "err.txt").find((dir / "nope.png").string()) != std::string::npos);
  CHECK(run_cli("run " + (dir / "missing.toml").string(), dir / "err2.txt") == 1);
  CHECK(run_cli("frobnicate", dir / "err3.txt") != 0);
}

TEST_CASE("cli end to end is deterministic") {
  const fs::path dir = scratch("cli");
  REQUIRE(run_cli("synth star --size 64 --bias 0.3 --noise 0.02 --seed 5 --out " + (dir / "star").string(),
                  dir / "e0") == 0);
  write_file(dir / "c.toml",
             "input = \"star/image.png\"\nground_truth = \"star/truth.png\"\nmodel = \"lsac\"\n"
             "rho = 8\nlambda = 0.1\ntau = 0.001\ninit = \"circles\"\ninit_radius = 1.7\n"
             "energy_check = true\noutput = \"out\"\n");
  const int first = run_cli("run " + (dir / "c.toml").string(), dir / "e1");
  REQUIRE((first == 0 || first == 2));
  const std::string labels = slurp(dir / "out" / "labels.png");
  const std::string trace = slurp(dir / "out" / "trace.csv");
  CHECK(run_cli("run " + (dir / "c.toml").string() + " --set seed=0", dir / "e2") == first);
  CHECK(slurp(dir / "out" / "labels.png") == labels);
  CHECK(slurp(dir / "out" / "trace.csv") == trace);

  CHECK(run_cli("score --pred " + (dir / "out" / "labels.png").string() + " --truth " +
                    (dir / "star" / "truth.png").string(),
                dir / "e3") == 0);
  CHECK(run_cli("synth star-series --size 32 --levels 3 --out " + (dir / "series").string(), dir / "e4") == 0);
  CHECK(fs::exists(dir / "series" / "level_2" / "image.png"));
}

TEST_CASE("trace csv") {
  SolverTrace t;
  t.energy_checked = false;
  IterationRecord r;
  r.iteration = 1;
  r.changed_pixels = 7;
  r.millis = 3.5;
  t.records.push_back(r);
  CHECK(trace_csv(t, false) == "iter,e_total,e_fidelity,e_regularizer,changed_pixels,millis\n1,,,,7,0\n");
  CHECK(trace_csv(t, true).find(",7,3.500\n") != std::string::npos);
  t.energy_checked = true;
  t.records[0].energy = {1.5, 1.0, 0.5};
  CHECK(trace_csv(t, false).find("1,1.5,1,0.5,7,0\n") != std::string::npos);
}

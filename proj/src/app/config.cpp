// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ictm/app/app.hpp"

namespace ictm::app {
namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

double to_double(std::string_view key, std::string_view value) {
  const std::string v = unquote(value);
  double out = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw UserError("config key '" + std::string(key) + "': expected a number, got '" + v + "'");
  }
  return out;
}

long long to_integer(std::string_view key, std::string_view value) {
  const std::string v = unquote(value);
  long long out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw UserError("config key '" + std::string(key) + "': expected an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  const std::string v = unquote(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UserError("config key '" + std::string(key) + "': expected true/false, got '" + v + "'");
}

std::vector<double> to_list(std::string_view key, std::string_view value) {
  std::string v = unquote(value);
  if (!v.empty() && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(to_double(key, trim(item)));
  }
  if (out.empty()) throw UserError("config key '" + std::string(key) + "': empty list");
  return out;
}

fs::path resolve(const fs::path& base, std::string_view value) {
  const fs::path p(unquote(value));
  return p.is_relative() && !base.empty() ? base / p : p;
}

void apply(RunConfig& c, std::string_view key, std::string_view value, const fs::path& base) {
  if (key == "input") c.input = resolve(base, value);
  else if (key == "model") c.model = unquote(value);
  else if (key == "n" || key == "phases") c.phases = static_cast<int>(to_integer(key, value));
  else if (key == "tau") c.tau = to_double(key, value);
  else if (key == "lambda") c.lambda = to_double(key, value);
  else if (key == "sigma") c.sigma = to_double(key, value);
  else if (key == "rho") c.rho = to_double(key, value);
  else if (key == "mu") c.mu = to_list(key, value);
  else if (key == "omega") c.omega = to_double(key, value);
  else if (key == "epsilon") c.epsilon = to_double(key, value);
  else if (key == "nu_floor") c.nu_floor = to_double(key, value);
  else if (key == "init") c.init.kind = unquote(value);
  else if (key == "init_block") c.init.block = static_cast<int>(to_integer(key, value));
  else if (key == "init_stripe") c.init.stripe = static_cast<int>(to_integer(key, value));
  else if (key == "init_count") c.init.count = static_cast<int>(to_integer(key, value));
  else if (key == "init_radius") c.init.radius = to_double(key, value);
  else if (key == "init_file") c.init.file = resolve(base, value);
  else if (key == "normalize") c.normalize = to_bool(key, value);
  else if (key == "output") c.output = resolve(base, value);
  else if (key == "energy_check") c.energy_check = to_bool(key, value);
  else if (key == "ground_truth") c.ground_truth = resolve(base, value);
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_integer(key, value));
  else if (key == "max_iters") c.max_iters = static_cast<int>(to_integer(key, value));
  else if (key == "tol_pixels") c.tol_pixels = static_cast<std::size_t>(to_integer(key, value));
  else if (key == "trace_timing") c.trace_timing = to_bool(key, value);
  else if (key == "boundary") {
    const std::string v = unquote(value);
    if (v == "periodic") c.boundary = Boundary::periodic;
    else if (v == "mirror") c.boundary = Boundary::mirror;
    else throw UserError("config key 'boundary': expected periodic or mirror, got '" + v + "'");
  } else {
    throw UserError("unknown config key '" + std::string(key) + "'");
  }
}

}  // namespace

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  apply(config, trim(key), value, {});
}

RunConfig parse_config(std::string_view text, const fs::path& base_dir) {
  RunConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view body = line;
    // '#' outside quotes starts a comment
    bool quoted = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '"') quoted = !quoted;
      if (body[i] == '#' && !quoted) {
        body = body.substr(0, i);
        break;
      }
    }
    body = trim(body);
    if (body.empty() || body.front() == '[') continue;  // blank line or section header
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw UserError("config line " + std::to_string(number) + ": expected key = value");
    }
    apply(config, trim(body.substr(0, eq)), body.substr(eq + 1), base_dir);
  }
  return config;
}

RunConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig config = parse_config(buffer.str(), path.parent_path());
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw UserError("override '" + o + "' is not key=value");
    apply_setting(config, std::string_view(o).substr(0, eq), std::string_view(o).substr(eq + 1));
  }
  return config;
}

SolverParams RunConfig::solver_params() const {
  SolverParams p;
  p.tau = tau;
  p.lambda = lambda;
  p.max_iters = max_iters;
  p.tol_pixels = tol_pixels;
  p.energy_check = energy_check;
  p.boundary = boundary;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw UserError(std::string("invalid solver settings: ") + e.what());
  }
  return p;
}

FidelityModel RunConfig::make_model(const GridSpec& grid) const {
  try {
    if (model == "cv") return FidelityModel::cv(phases);
    if (model == "lif") return FidelityModel::lif(grid, phases, sigma, mu, epsilon, boundary);
    if (model == "lgif") {
      return FidelityModel::lgif(grid, phases, sigma, mu, omega, epsilon, boundary);
    }
    if (model == "lsac") return FidelityModel::lsac(grid, phases, rho, nu_floor, boundary);
  } catch (const std::invalid_argument& e) {
    throw UserError(std::string("invalid model settings: ") + e.what());
  }
  throw UserError("unknown model '" + model + "' (expected cv, lif, lgif or lsac)");
}

}  // namespace ictm::app

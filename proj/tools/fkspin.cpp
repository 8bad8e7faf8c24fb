// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

// fkspin: batch front end for the Feynman-Kac estimators and the lattice
// oracle.
//
//   fkspin <validate|estimate|oracle|decay|martingale|diamagnetic>
//          [--config FILE] [--seed N] [--samples N] [--threads N]
//          [--out DIR] [--format csv|json] [--set section.key=value]...
//
// Exit status: 0 success, 1 a named check failed, 2 bad configuration,
// 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "fkspin/decay_lab.hpp"
#include "fkspin/errors.hpp"
#include "fkspin/lattice_oracle.hpp"
#include "fkspin/mc_engine.hpp"
#include "fkspin/validation.hpp"
#include "output.hpp"

namespace fs = std::filesystem;
using namespace fkspin;
using namespace fkspin::cli;

namespace {

struct RunResult {
  std::map<std::string, Table> tables;  // file stem -> table
  std::vector<std::string> failed;      // names of failed checks
};

Table estimate_table(const Estimate& e) {
  Table t{{"re", "im", "std_error", "n", "invalid_count", "zero_hit_fraction",
           "finite_variance_guarantee"},
          {}};
  t.add({e.mean.real(), e.mean.imag(), e.std_error, integer(e.n), integer(e.invalid_count),
         e.zero_hit_fraction, flag(e.finite_variance_guarantee)});
  return t;
}

int start_alpha(const Config& c) {
  const auto a = c.count("start", "alpha");
  if (a > 1) throw ConfigError("start.alpha must be 0 or 1");
  return static_cast<int>(a);
}

RunResult run_validate(const Config& c) {
  SuiteOptions o;
  o.seed = c.count("experiment", "seed");
  o.n_samples = c.count("experiment", "samples");
  o.workers = static_cast<unsigned>(c.count("experiment", "threads"));
  o.n_subordinator_steps = static_cast<int>(c.count("discretization", "n_subordinator_steps"));
  RunResult r;
  Table t{{"check", "value", "reference", "tolerance", "passed"}, {}};
  for (const auto& chk : run_validation_suite(o)) {
    t.add({chk.name, chk.value, chk.reference, chk.tolerance, flag(chk.passed)});
    if (!chk.passed) r.failed.push_back(chk.name);
  }
  r.tables["results"] = std::move(t);
  return r;
}

RunResult run_estimate(const Config& c) {
  const auto spec = spec_from(c, true);
  const auto g = function_from(c, "test_function");
  RunResult r;
  if (c.has_section("initial_function")) {
    r.tables["results"] = estimate_table(matrix_element(function_from(c, "initial_function"), g, spec));
  } else {
    r.tables["results"] = estimate_table(apply_semigroup(c.vec("start", "x"), start_alpha(c), g, spec));
  }
  return r;
}

RunResult run_oracle_cmd(const Config& c) {
  const auto spec = spec_from(c, false);
  const auto lattice = lattice_from(c, spec);
  const auto run = run_oracle(spec.fields, lattice, spec.mass);
  const auto k = std::min<std::uint64_t>(c.count("lattice", "eigenvalues"), lattice.dimension());
  if (k < 1) throw ConfigError("lattice.eigenvalues must be >= 1");
  const auto low = eigh_lowest(run.H_plus_V.data, static_cast<int>(k));

  RunResult r;
  Table summary{{"energy", "residual", "dimension", "spacing"}, {}};
  summary.add({run.ground.energy, run.ground.residual, integer(lattice.dimension()), lattice.spacing()});
  r.tables["results"] = std::move(summary);
  Table spectrum{{"index", "eigenvalue"}, {}};
  for (Eigen::Index i = 0; i < low.values.size(); ++i) spectrum.add({std::int64_t{i}, low.values[i]});
  r.tables["spectrum"] = std::move(spectrum);
  Table state{{"x", "y", "z", "theta", "re", "im"}, {}};
  for (int theta : lattice.with_spin ? std::vector<int>{1, -1} : std::vector<int>{1}) {
    for (std::size_t s = 0; s < lattice.sites(); ++s) {
      const Vec3 x = lattice.position(s);
      const auto v = run.ground.site_value(s, theta);
      state.add({x[0], x[1], x[2], std::int64_t{theta}, v.real(), v.imag()});
    }
  }
  r.tables["state"] = std::move(state);
  return r;
}

StopRule stop_rule_from(const Config& c) {
  const auto s = c.choice("decay", "stop_rule", {"none", "exit", "enter"});
  return s == "exit" ? StopRule::exit : s == "enter" ? StopRule::enter : StopRule::none;
}

RunResult run_decay(const Config& c) {
  const auto spec = spec_from(c, true);
  const auto lattice = lattice_from(c, spec);
  const auto run = run_oracle(spec.fields, lattice, spec.mass);
  const double dx = lattice.spacing();
  FitWindow window{c.has("decay", "window_lo") ? c.num("decay", "window_lo") : lattice.length / 8.0,
                   c.has("decay", "window_hi") ? c.num("decay", "window_hi")
                                               : 0.5 * lattice.length - 2.0 * dx};
  const double m_star = spec.mode == Mode::spin ? SpinCoupling{spec.fields.b}.m_star() : 0.0;
  const auto profile = radial_profile(run.ground, c.num("decay", "shell_width"));
  const auto fit = fit_decay(run.ground, window, c.num("decay", "shell_width"));
  const auto bound = stopped_bound(spec, run.ground, c.vec("start", "x"), start_alpha(c), spec.t,
                                   c.num("decay", "radius"), stop_rule_from(c), c.num("decay", "budget"));

  RunResult r;
  Table t{{"energy", "m", "m_star", "m_epsilon", "condition_n34", "a_hat", "b_hat", "r_squared", "shells",
           "window_lo", "window_hi", "stopped_lhs", "stopped_rhs", "stopped_std_error", "stopped_holds"},
          {}};
  Cell m_eps = std::string("na");
  Cell cond = std::string("na");
  if (run.ground.energy < 0.0) {
    const auto rb = rate_bounds(run.ground.energy, spec.mass, m_star);
    m_eps = rb.m_epsilon;
    if (rb.condition_n34) cond = flag(*rb.condition_n34);
  }
  t.add({run.ground.energy, spec.mass, m_star, m_eps, cond, fit.a_hat, fit.b_hat, fit.r_squared,
         std::int64_t{fit.shells}, window.r_lo, window.r_hi, bound.lhs, bound.rhs,
         bound.rhs_expectation.std_error * bound.sup_norm, flag(bound.holds)});
  if (!(fit.a_hat > 0.0)) r.failed.push_back("decay_rate_positive");
  if (!bound.holds) r.failed.push_back("stopped_bound");
  r.tables["results"] = std::move(t);
  Table p{{"r", "value"}, {}};
  for (const auto& pt : profile) p.add({pt.r, pt.value});
  r.tables["profile"] = std::move(p);
  return r;
}

RunResult run_martingale(const Config& c) {
  const auto spec = spec_from(c, false);
  const auto lattice = lattice_from(c, spec);
  const auto run = run_oracle(spec.fields, lattice, spec.mass);
  const auto dyn = c.choice("decay", "dynamics", {"relativistic", "non_relativistic"});
  const auto t_list = c.list("decay", "t_list");
  for (double t : t_list) {
    if (!(t >= 0.0)) throw ConfigError("decay.t_list entries must be >= 0");
  }
  // Non-relativistic dynamics pair with the ground state of h + V.
  BoundState state = run.ground;
  if (dyn == "non_relativistic") {
    state = ground_state(add_potential(build_h(spec.fields, lattice), spec.fields.V));
  }
  const auto scan = martingale_scan(spec, state, c.vec("start", "x"), start_alpha(c), t_list,
                                    c.num("decay", "budget"),
                                    dyn == "relativistic" ? Dynamics::relativistic : Dynamics::non_relativistic);
  RunResult r;
  Table t{{"t", "re", "im", "std_error", "n", "reference_re", "reference_im"}, {}};
  for (std::size_t i = 0; i < scan.t_list.size(); ++i) {
    const auto& e = scan.estimates[i];
    t.add({scan.t_list[i], e.mean.real(), e.mean.imag(), e.std_error, integer(e.n), scan.reference.real(),
           scan.reference.imag()});
  }
  r.tables["results"] = std::move(t);
  Table s{{"energy", "max_gap", "budget", "constant"}, {}};
  s.add({state.energy, scan.max_gap, scan.budget, flag(scan.constant)});
  r.tables["summary"] = std::move(s);
  if (!scan.constant) r.failed.push_back("martingale_constant");
  return r;
}

RunResult run_diamagnetic(const Config& c) {
  const auto spec = spec_from(c, true);
  const auto g = function_from(c, "test_function");
  const auto f = c.has_section("initial_function") ? function_from(c, "initial_function") : g;
  const auto d = diamagnetic_check(f, g, spec);
  RunResult r;
  Table t{{"lhs_re", "lhs_im", "lhs_modulus", "rhs", "combined_std_error", "holds"}, {}};
  t.add({d.lhs.mean.real(), d.lhs.mean.imag(), d.lhs_modulus, d.rhs.mean.real(), d.combined_std_error,
         flag(d.holds)});
  r.tables["results"] = std::move(t);
  if (!d.holds) r.failed.push_back("diamagnetic_inequality");
  return r;
}

// Used when no --config is given.
Config::Table builtin_defaults() {
  return {{"experiment", {{"t", "1"}}}};
}

Config::Table load_config(const std::string& path, std::string& command_from_manifest) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  if (fs::path(path).extension() == ".json") {
    nlohmann::json m;
    try {
      m = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("manifest parse error: ") + e.what());
    }
    if (!m.contains("config") || !m["config"].is_object()) throw ConfigError("manifest has no config object");
    Config::Table t;
    for (const auto& [section, keys] : m["config"].items()) {
      for (const auto& [key, value] : keys.items()) {
        if (!value.is_string()) throw ConfigError("manifest value " + section + "." + key + " is not a string");
        t[section][key] = value.get<std::string>();
      }
    }
    if (m.contains("command") && m["command"].is_string()) command_from_manifest = m["command"];
    return t;
  }
  return Config::parse_ini(in);
}

void write_outputs(const fs::path& dir, const std::string& format, const RunResult& r) {
  for (const auto& [stem, table] : r.tables) {
    if (format == "json") {
      std::ofstream(dir / (stem + ".json")) << to_json(table).dump(2) << '\n';
    } else {
      std::ofstream os(dir / (stem + ".csv"));
      write_csv(os, table);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feynman-Kac estimators for the relativistic Pauli operator"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> threads;
  std::string out_dir;
  std::string format;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "INI config file or a manifest.json to replay");
  app.add_option("--seed", seed, "override experiment.seed");
  app.add_option("--samples", samples, "override experiment.samples");
  app.add_option("--threads", threads, "override experiment.threads");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--set", overrides, "override one key, section.key=value");
  for (const char* name : {"validate", "estimate", "oracle", "decay", "martingale", "diamagnetic"}) {
    app.add_subcommand(name);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  std::string command = app.get_subcommands().front()->get_name();

  try {
    std::string manifest_command;
    Config::Table table = config_path.empty() ? builtin_defaults() : load_config(config_path, manifest_command);
    if (!manifest_command.empty() && manifest_command != command) {
      throw ConfigError("manifest was written by '" + manifest_command + "', not '" + command + "'");
    }
    if (seed) table["experiment"]["seed"] = std::to_string(*seed);
    if (samples) table["experiment"]["samples"] = std::to_string(*samples);
    if (threads) table["experiment"]["threads"] = std::to_string(*threads);
    if (!format.empty()) table["output"]["format"] = format;
    for (const auto& o : overrides) Config::apply_override(table, o);
    const Config config = Config::from_table(table);

    fs::path dir = out_dir;
    if (dir.empty() && config.has("output", "dir")) dir = config.str("output", "dir");
    if (dir.empty()) {
      const char* env = std::getenv("FKSPIN_OUTPUT_DIR");
      dir = env && *env ? env : "fkspin-out";
    }
    const auto fmt = config.choice("output", "format", {"csv", "json"});
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());

    const auto t0 = std::chrono::steady_clock::now();
    RunResult result;
    if (command == "validate") result = run_validate(config);
    if (command == "estimate") result = run_estimate(config);
    if (command == "oracle") result = run_oracle_cmd(config);
    if (command == "decay") result = run_decay(config);
    if (command == "martingale") result = run_martingale(config);
    if (command == "diamagnetic") result = run_diamagnetic(config);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_outputs(dir, fmt, result);

    // The replayable table leaves out where the output went.
    nlohmann::ordered_json cfg;
    for (const auto& [section, keys] : config.values()) {
      for (const auto& [key, value] : keys) {
        if (section == "output" && key == "dir") continue;
        cfg[section][key] = value;
      }
    }
    nlohmann::ordered_json manifest;
    manifest["tool"] = "fkspin";
    manifest["version"] = FKSPIN_VERSION;
    manifest["command"] = command;
    manifest["seed"] = config.count("experiment", "seed");
    manifest["samples"] = config.count("experiment", "samples");
    manifest["threads"] = config.count("experiment", "threads");
    manifest["discretization"] = cfg["discretization"];
    manifest["wall_time_seconds"] = wall;
    manifest["outputs"] = nlohmann::ordered_json::array();
    for (const auto& [stem, table_out] : result.tables) manifest["outputs"].push_back(stem + "." + fmt);
    manifest["failed_checks"] = result.failed;
    manifest["config"] = cfg;
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';

    if (!result.failed.empty()) {
      for (const auto& name : result.failed) std::cerr << "fkspin: check failed: " << name << '\n';
      return 1;
    }
    std::cout << "fkspin " << command << ": ok, results in " << dir.string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "fkspin: config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "fkspin: invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "fkspin: numerical error: " << e.what() << '\n';
    return 3;
  }
}

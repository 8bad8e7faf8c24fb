// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Run configuration: INI sections checked against a fixed schema, with
// command-line overrides and defaults merged into one effective table.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <map>
#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fkspin/decay_lab.hpp"
#include "fkspin/fields.hpp"
#include "fkspin/lattice_oracle.hpp"
#include "fkspin/mc_engine.hpp"
#include "fkspin/test_functions.hpp"

namespace fkspin::cli {

/// Schema violations; the CLI maps these to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// section -> key -> default ("" for no default)
using Schema = std::map<std::string, std::map<std::string, std::string>>;

inline const Schema& schema() {
  static const Schema s = {
      {"experiment",
       {{"t", ""},
        {"mass", "1"},
        {"mode", "spinless"},
        {"epsilon", "0"},
        {"samples", "100000"},
        {"seed", "1"},
        {"threads", "1"}}},
      {"discretization",
       {{"n_subordinator_steps", "32"}, {"bm_max_step", "0.01"}, {"max_grid_points", "4194304"}}},
      {"start", {{"x", "0,0,0"}, {"alpha", "0"}}},
      {"vector_potential",
       {{"family", "zero"}, {"value", "0,0,0"}, {"b", "0,0,0"}, {"center", "0,0,0"}, {"kappa", "1"}}},
      {"magnetic_field",
       {{"family", "zero"},
        {"value", "0,0,0"},
        {"amplitude", "0,0,0"},
        {"center", "0,0,0"},
        {"width", "1"},
        {"cutoff", "3"},
        {"gradient_1", "0,0,0"},
        {"gradient_2", "0,0,0"},
        {"gradient_3", "0,0,0"},
        {"clamp", ""}}},
      {"potential",
       {{"family", "zero"},
        {"value", "0"},
        {"omega", "1"},
        {"depth", "1"},
        {"radius", "1"},
        {"gamma", "1"},
        {"delta", "1"}}},
      {"test_function",
       {{"shape", "gaussian"},
        {"center", "0,0,0"},
        {"width", "1"},
        {"amplitude", "1"},
        {"lo", "-1,-1,-1"},
        {"hi", "1,1,1"},
        {"wavevector", "0,0,0"},
        {"spin", "both"}}},
      {"initial_function",
       {{"shape", "gaussian"},
        {"center", "0,0,0"},
        {"width", "1"},
        {"amplitude", "1"},
        {"lo", "-1,-1,-1"},
        {"hi", "1,1,1"},
        {"wavevector", "0,0,0"},
        {"spin", "both"}}},
      {"lattice", {{"n", "8"}, {"length", "8"}, {"eigenvalues", "10"}}},
      {"decay",
       {{"window_lo", ""},
        {"window_hi", ""},
        {"shell_width", "0"},
        {"t_list", "0.25,0.5,1"},
        {"budget", "0.05"},
        {"dynamics", "relativistic"},
        {"stop_rule", "none"},
        {"radius", "1"}}},
      {"output", {{"dir", ""}, {"format", "csv"}}},
  };
  return s;
}

/// Effective configuration: every schema key that has a value.
class Config {
 public:
  using Table = std::map<std::string, std::map<std::string, std::string>>;

  /// Optional sections such as [initial_function] get their defaults only
  /// when the input names them.
  static Config from_table(const Table& input) {
    Config c;
    for (const auto& [section, keys] : input) {
      const auto sit = schema().find(section);
      if (sit == schema().end()) throw ConfigError("unknown section [" + section + "]");
      c.values_[section];
      for (const auto& [key, value] : keys) {
        if (!sit->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
        c.values_[section][key] = value;
      }
    }
    for (const auto& [section, keys] : schema()) {
      if (is_optional(section) && !c.values_.count(section)) continue;
      for (const auto& [key, def] : keys) {
        if (!def.empty() && !c.values_[section].count(key)) c.values_[section][key] = def;
      }
    }
    return c;
  }

  static Table parse_ini(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    Table t;
    for (const auto& [section, sub] : tree) {
      if (sub.empty()) throw ConfigError("key " + section + " outside any section");
      for (const auto& [key, value] : sub) t[section][key] = value.data();
    }
    return t;
  }

  /// "section.key=value"
  static void apply_override(Table& t, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError("override must look like section.key=value: " + assignment);
    }
    t[assignment.substr(0, dot)][assignment.substr(dot + 1, eq - dot - 1)] = assignment.substr(eq + 1);
  }

  const Table& values() const { return values_; }

  static bool is_optional(const std::string& section) { return section == "initial_function"; }

  bool has_section(const std::string& s) const { return values_.count(s) > 0; }

  bool has(const std::string& section, const std::string& key) const {
    const auto it = values_.find(section);
    return it != values_.end() && it->second.count(key);
  }

  std::string str(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw ConfigError("missing required key " + section + "." + key);
    return values_.at(section).at(key);
  }

  double num(const std::string& section, const std::string& key) const {
    const auto s = str(section, key);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::logic_error&) {
      throw ConfigError(section + "." + key + ": not a number: '" + s + "'");
    }
  }

  std::uint64_t count(const std::string& section, const std::string& key) const {
    const double v = num(section, key);
    if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
      throw ConfigError(section + "." + key + ": expected a non-negative integer");
    }
    return static_cast<std::uint64_t>(v);
  }

  std::vector<double> list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(str(section, key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::logic_error&) {
        throw ConfigError(section + "." + key + ": bad list entry '" + item + "'");
      }
    }
    return out;
  }

  Vec3 vec(const std::string& section, const std::string& key) const {
    const auto v = list(section, key);
    if (v.size() != 3) throw ConfigError(section + "." + key + ": expected three comma-separated numbers");
    return {v[0], v[1], v[2]};
  }

  std::string choice(const std::string& section, const std::string& key,
                     const std::vector<std::string>& allowed) const {
    const auto s = str(section, key);
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string msg = section + "." + key + ": '" + s + "' not one of";
      for (const auto& a : allowed) msg += " " + a;
      throw ConfigError(msg);
    }
    return s;
  }

 private:
  Table values_;
};

// ---------------------------------------------------------------------------
// Typed views

inline FieldConfig fields_from(const Config& c) {
  FieldConfig f;
  const auto a = c.choice("vector_potential", "family", {"zero", "constant", "linear_gauge", "gradient"});
  if (a == "constant") f.a.family = ConstantA{c.vec("vector_potential", "value")};
  if (a == "linear_gauge") {
    f.a.family = LinearGaugeA{c.vec("vector_potential", "b"), c.vec("vector_potential", "center")};
  }
  if (a == "gradient") {
    f.a.family = GradientA{c.num("vector_potential", "kappa"), c.vec("vector_potential", "center")};
  }

  const auto b = c.choice("magnetic_field", "family", {"zero", "constant", "gaussian_bump", "linear"});
  if (b == "constant") f.b.family = ConstantB{c.vec("magnetic_field", "value")};
  if (b == "gaussian_bump") {
    const double width = c.num("magnetic_field", "width");
    if (!(width > 0.0)) throw ConfigError("magnetic_field.width must be > 0");
    f.b.family = GaussianBumpB{c.vec("magnetic_field", "amplitude"), c.vec("magnetic_field", "center"),
                               width, c.num("magnetic_field", "cutoff")};
  }
  if (b == "linear") {
    f.b.family = LinearB{{c.vec("magnetic_field", "gradient_1"), c.vec("magnetic_field", "gradient_2"),
                          c.vec("magnetic_field", "gradient_3")}};
  }
  if (c.has("magnetic_field", "clamp")) {
    const double level = c.num("magnetic_field", "clamp");
    if (!(level > 0.0)) throw ConfigError("magnetic_field.clamp must be > 0");
    f.b = truncate_field(f.b, level);
  }

  const auto v = c.choice("potential", "family",
                          {"zero", "constant", "harmonic", "finite_well", "soft_coulomb"});
  if (v == "constant") f.V.family = ConstantV{c.num("potential", "value")};
  if (v == "harmonic") f.V.family = HarmonicV{c.num("potential", "omega")};
  if (v == "finite_well") f.V.family = FiniteWellV{c.num("potential", "depth"), c.num("potential", "radius")};
  if (v == "soft_coulomb") {
    f.V.family = SoftCoulombV{c.num("potential", "gamma"), c.num("potential", "delta")};
  }
  return f;
}

inline TestFunction function_from(const Config& c, const std::string& section) {
  const auto shape = c.choice(section, "shape", {"gaussian", "box"});
  const auto spin_s = c.choice(section, "spin", {"both", "plus", "minus"});
  const SpinSelector spin = spin_s == "plus"    ? SpinSelector::plus
                            : spin_s == "minus" ? SpinSelector::minus
                                                : SpinSelector::both;
  TestFunction f = shape == "gaussian"
                       ? TestFunction::gaussian(c.vec(section, "center"), c.num(section, "width"),
                                                c.num(section, "amplitude"), spin)
                       : TestFunction::box(c.vec(section, "lo"), c.vec(section, "hi"),
                                           c.num(section, "amplitude"), spin);
  f.wavevector = c.vec(section, "wavevector");
  return f;
}

/// The engine settings; `t` is read only when require_t is set.
inline ExperimentSpec spec_from(const Config& c, bool require_t) {
  ExperimentSpec s;
  if (require_t) s.t = c.num("experiment", "t");
  s.fields = fields_from(c);
  s.mass = c.num("experiment", "mass");
  s.mode = c.choice("experiment", "mode", {"spin", "spinless"}) == "spin" ? Mode::spin : Mode::spinless;
  s.epsilon = c.num("experiment", "epsilon");
  s.n_samples = c.count("experiment", "samples");
  s.seed = c.count("experiment", "seed");
  s.workers = static_cast<unsigned>(c.count("experiment", "threads"));
  s.disc.n_subordinator_steps = static_cast<int>(c.count("discretization", "n_subordinator_steps"));
  s.disc.bm_max_step = c.num("discretization", "bm_max_step");
  s.disc.max_grid_points = c.count("discretization", "max_grid_points");
  s.validate();
  return s;
}

inline Lattice lattice_from(const Config& c, const ExperimentSpec& s) {
  Lattice l{static_cast<int>(c.count("lattice", "n")), c.num("lattice", "length"), s.mode == Mode::spin};
  l.validate();
  return l;
}

}  // namespace fkspin::cli

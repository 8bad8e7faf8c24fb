// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * Path weight of the spin-1/2 relativistic Feynman-Kac formula.
 *
 * For a start point (x, alpha) the weight of one realisation is
 *
 *   e^{T_t} e^{S_V} e^{S_A} e^{S_S},
 *   S_V = -int_0^t V(B_{T_s}) ds
 *   S_A = -i int_0^{T_t} a(B_s) o dB_s                       (Stratonovich)
 *   S_S = -int_0^{T_t} U_d(B_s, theta_s) ds
 *         + sum_{jumps r} log(-chi_eps(U_od(B_r, -theta_{r-})))
 *
 * and the spinless weight is e^{S_V + S_A}.  The jump sum is carried as a
 * complex product with a separate power-of-two scale, which is exact where
 * a sum of complex logarithms would need branch bookkeeping.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <numbers>
#include <vector>

#include "fkspin/errors.hpp"
#include "fkspin/fields.hpp"
#include "fkspin/levy_paths.hpp"
#include "fkspin/rng.hpp"

namespace fkspin {

/// One realisation of (subordinator grid, Brownian path on the union grid,
/// jump times, start spin).
struct PathBundle {
  SubordinatorPath sub;
  BrownianPath bm;  // horizon == sub.final_value()
  SpinTrack spin;   // spin.jumps.horizon == sub.final_value()
  std::vector<std::size_t> image_index;  // bm index of T_{s_j}, j = 0..n
  std::vector<std::size_t> jump_index;   // bm index of each jump time

  Vec3 endpoint() const { return bm.values[image_index.back()]; }
  Vec3 image(std::size_t j) const { return bm.values[image_index[j]]; }
  /// theta_{T_t}
  int final_spin() const {
    return detail::spin_from_count(spin.alpha, spin.jumps.jump_times.size());
  }
};

struct Discretization {
  int n_subordinator_steps = 32;
  /// Largest Brownian grid gap when fine-grid integrals are needed
  /// (a != 0, or a non-constant b3 in spin mode).
  double bm_max_step = 0.01;
  /// Grids larger than this mark the sample invalid.
  std::size_t max_grid_points = std::size_t{1} << 22;
};

struct BundleOptions {
  bool with_jumps = true;
  bool refine = false;
  /// T_s = s (non-relativistic variant).
  bool deterministic_time = false;
};

namespace detail {

/// Merge anchor times into a strictly increasing grid starting at 0, then
/// refine gaps wider than max_step.  Returns false if the grid would exceed
/// max_points.
inline bool build_union_grid(const std::vector<double>& images, const std::vector<double>& jumps,
                             bool refine, double max_step, std::size_t max_points,
                             std::vector<double>& grid) {
  std::vector<double> anchors;
  anchors.reserve(images.size() + jumps.size() + 1);
  anchors.push_back(0.0);
  std::merge(images.begin(), images.end(), jumps.begin(), jumps.end(),
             std::back_inserter(anchors));
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
  grid.clear();
  if (!refine) {
    grid = std::move(anchors);
    return grid.size() <= max_points;
  }
  std::size_t total = 1;
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    const double gap = anchors[i] - anchors[i - 1];
    total += static_cast<std::size_t>(std::max(1.0, std::ceil(gap / max_step)));
    if (total > max_points) return false;
  }
  grid.reserve(total);
  grid.push_back(anchors[0]);
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    const double lo = anchors[i - 1];
    const double gap = anchors[i] - lo;
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(gap / max_step)));
    for (std::size_t k = 1; k < pieces; ++k) {
      const double v = lo + gap * static_cast<double>(k) / static_cast<double>(pieces);
      if (v > grid.back() && v < anchors[i]) grid.push_back(v);
    }
    grid.push_back(anchors[i]);
  }
  return true;
}

inline std::size_t grid_position(const std::vector<double>& grid, double value) {
  const auto it = std::lower_bound(grid.begin(), grid.end(), value);
  require(it != grid.end() && *it == value, "path bundle: time missing from Brownian grid");
  return static_cast<std::size_t>(it - grid.begin());
}

}  // namespace detail

/// Assemble a bundle from already-sampled pieces, locating every
/// subordinator image and jump time on the Brownian grid.
inline PathBundle make_bundle(SubordinatorPath sub, BrownianPath bm, JumpSet jumps, int alpha) {
  detail::require(alpha == 0 || alpha == 1, "path bundle: alpha must be 0 or 1");
  detail::require(bm.times.back() == sub.final_value(),
                  "path bundle: Brownian horizon must equal T_t");
  PathBundle bundle;
  bundle.image_index.reserve(sub.values.size());
  for (double v : sub.values) bundle.image_index.push_back(detail::grid_position(bm.times, v));
  bundle.jump_index.reserve(jumps.jump_times.size());
  for (double r : jumps.jump_times) bundle.jump_index.push_back(detail::grid_position(bm.times, r));
  jumps.horizon = sub.final_value();
  bundle.sub = std::move(sub);
  bundle.bm = std::move(bm);
  bundle.spin = SpinTrack{alpha, std::move(jumps)};
  return bundle;
}

/// Sample sample_index's bundle.  Returns false when the grid cap is hit.
inline bool sample_bundle(const Vec3& start, int alpha, double t, double m,
                          const Discretization& disc, const BundleOptions& opts,
                          std::uint64_t seed, std::uint64_t sample_index, PathBundle& out) {
  RandomStream sub_rng(seed, sample_index, StreamRole::subordinator);
  SubordinatorPath sub;
  if (opts.deterministic_time) {
    sub.t_final = t;
    sub.mass = m;
    sub.s_grid.resize(disc.n_subordinator_steps + 1);
    for (int j = 0; j <= disc.n_subordinator_steps; ++j) {
      sub.s_grid[j] = (j == disc.n_subordinator_steps) ? t : j * (t / disc.n_subordinator_steps);
    }
    sub.values = sub.s_grid;
  } else {
    sub = sample_subordinator_path(t, disc.n_subordinator_steps, m, sub_rng);
  }
  JumpSet jumps{sub.final_value(), {}};
  if (opts.with_jumps) {
    RandomStream jump_rng(seed, sample_index, StreamRole::jumps);
    if (!sample_jumps(sub.final_value(), jump_rng, disc.max_grid_points, jumps)) return false;
  }
  std::vector<double> grid;
  if (!detail::build_union_grid(sub.values, jumps.jump_times, opts.refine, disc.bm_max_step,
                                disc.max_grid_points, grid)) {
    return false;
  }
  RandomStream bm_rng(seed, sample_index, StreamRole::brownian);
  auto bm = sample_brownian_on_grid(start, grid, bm_rng);
  out = make_bundle(std::move(sub), std::move(bm), std::move(jumps), alpha);
  return true;
}

// ---------------------------------------------------------------------------
// Action components

/// S_V as a left-endpoint Riemann sum over the s-grid.
inline double action_potential(const PathBundle& bundle, const Potential& V) {
  if (V.is_zero()) return 0.0;
  const auto& s = bundle.sub.s_grid;
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < s.size(); ++j) acc -= V(bundle.image(j)) * (s[j + 1] - s[j]);
  return acc;
}

/// Phase phi with S_A = -i phi: midpoint (Stratonovich) sum over the
/// Brownian grid.
inline double action_vector(const PathBundle& bundle, const VectorPotential& a) {
  if (a.is_zero()) return 0.0;
  const auto& b = bundle.bm.values;
  double phi = 0.0;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    phi += dot(a(0.5 * (b[i] + b[i + 1])), b[i + 1] - b[i]);
  }
  return phi;
}

struct SpinAction {
  double diag_spin = 0.0;
  /// prod of jump factors = offdiag_mantissa * 2^offdiag_exp2
  std::complex<double> offdiag_mantissa{1.0, 0.0};
  int offdiag_exp2 = 0;
  bool zero_hit = false;

  double offdiag_log_modulus() const {
    return std::log(std::abs(offdiag_mantissa)) + offdiag_exp2 * std::numbers::ln2;
  }
};

/// chi_eps(z) = z + eps 1{|z| < eps}
inline std::complex<double> regularize(std::complex<double> z, double epsilon) {
  return std::abs(z) < epsilon ? z + epsilon : z;
}

inline SpinAction action_spin(const PathBundle& bundle, const SpinCoupling& coupling,
                              double epsilon) {
  detail::require(epsilon >= 0.0, "action_spin: epsilon must be >= 0");
  SpinAction out;
  if (coupling.b.is_zero() && bundle.jump_index.empty()) return out;

  const auto& times = bundle.bm.times;
  const auto& path = bundle.bm.values;
  const auto& jumps = bundle.jump_index;

  // Diagonal part: -sum U_d(B_i, theta_i) dtau_i with theta right-continuous.
  if (!coupling.b.is_zero()) {
    std::size_t next_jump = 0;
    std::size_t flips = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      while (next_jump < jumps.size() && jumps[next_jump] <= i) {
        ++flips;
        ++next_jump;
      }
      const int theta = detail::spin_from_count(bundle.spin.alpha, flips);
      acc -= coupling.diagonal(path[i], theta) * (times[i + 1] - times[i]);
    }
    out.diag_spin = acc;
  }

  // Jump factors -chi_eps(U_od(B_r, -theta_{r-})).
  for (std::size_t j = 0; j < jumps.size(); ++j) {
    const int theta_left = detail::spin_from_count(bundle.spin.alpha, j);
    const auto factor = -regularize(coupling.offdiagonal(path[jumps[j]], -theta_left), epsilon);
    if (factor == std::complex<double>{0.0, 0.0}) {
      out.zero_hit = true;
      out.offdiag_mantissa = 0.0;
      return out;
    }
    out.offdiag_mantissa *= factor;
    int e = 0;
    std::frexp(std::abs(out.offdiag_mantissa), &e);
    out.offdiag_mantissa = {std::ldexp(out.offdiag_mantissa.real(), -e),
                            std::ldexp(out.offdiag_mantissa.imag(), -e)};
    out.offdiag_exp2 += e;
  }
  return out;
}

enum class Mode { spin, spinless };

struct ActionParts {
  double s_v = 0.0;
  double s_a_phase = 0.0;  // S_A = -i s_a_phase
  SpinAction spin;
};

/// Path weight held as exp(log_modulus) * phase.
struct FkWeight {
  double log_modulus = 0.0;
  std::complex<double> phase{1.0, 0.0};
  bool zero_hit = false;
  bool valid = true;
  ActionParts parts;

  std::complex<double> value() const {
    if (zero_hit) return {0.0, 0.0};
    return std::exp(log_modulus) * phase;
  }
};

inline FkWeight fk_weight(const PathBundle& bundle, const FieldConfig& fields, double epsilon,
                          Mode mode) {
  FkWeight w;
  w.parts.s_v = action_potential(bundle, fields.V);
  w.parts.s_a_phase = action_vector(bundle, fields.a);
  double log_mod = w.parts.s_v;
  std::complex<double> phase = std::polar(1.0, -w.parts.s_a_phase);
  if (mode == Mode::spin) {
    w.parts.spin = action_spin(bundle, SpinCoupling{fields.b}, epsilon);
    if (w.parts.spin.zero_hit) {
      w.zero_hit = true;
      w.log_modulus = -std::numeric_limits<double>::infinity();
      w.phase = 0.0;
      return w;
    }
    const auto& m = w.parts.spin.offdiag_mantissa;
    log_mod += bundle.sub.final_value() + w.parts.spin.diag_spin + w.parts.spin.offdiag_log_modulus();
    phase *= m / std::abs(m);
  }
  w.log_modulus = log_mod;
  w.phase = phase;
  w.valid = std::isfinite(log_mod) && std::isfinite(phase.real()) && std::isfinite(phase.imag()) &&
            log_mod < 700.0;
  return w;
}

}  // namespace fkspin

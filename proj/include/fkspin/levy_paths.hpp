// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * The three driving processes of the path integral: three-dimensional
 * Brownian motion, a unit-intensity Poisson process (spin flips), and the
 * relativistic 1/2-stable subordinator T_t with Laplace exponent
 * sqrt(2u + m^2) - m.  Also the closed-form laws used to validate them.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "fkspin/errors.hpp"
#include "fkspin/quadrature.hpp"
#include "fkspin/rng.hpp"
#include "fkspin/special.hpp"
#include "fkspin/vec3.hpp"

namespace fkspin {

struct SubordinatorPath {
  double t_final = 0.0;
  double mass = 0.0;
  std::vector<double> s_grid;  // uniform, s_grid.front() == 0, back() == t_final
  std::vector<double> values;  // T at each s_grid point, values.front() == 0

  double final_value() const { return values.back(); }
  double step() const { return s_grid.size() > 1 ? s_grid[1] - s_grid[0] : 0.0; }
};

struct BrownianPath {
  Vec3 start;
  std::vector<double> times;  // strictly increasing, times.front() == 0
  std::vector<Vec3> values;   // values.front() == start
};

struct JumpSet {
  double horizon = 0.0;
  std::vector<double> jump_times;  // sorted, distinct, in (0, horizon]
};

struct SpinTrack {
  int alpha = 0;  // start index; theta_0 = (-1)^alpha
  JumpSet jumps;
};

// ---------------------------------------------------------------------------
// Subordinator

/// One increment of the subordinator over a step of length dt.
///
/// For m > 0 the law is inverse Gaussian with mean dt/m and shape dt^2,
/// drawn by the transformation-with-multiple-roots method (one normal, one
/// uniform).  For m = 0 it is the hitting-time law dt^2 / Z^2.
inline double sample_subordinator_increment(double dt, double m, RandomStream& rng) {
  detail::require(dt >= 0.0, "subordinator increment: dt must be >= 0");
  detail::require(m >= 0.0, "subordinator increment: mass must be >= 0");
  if (dt == 0.0) return 0.0;
  if (m == 0.0) {
    double z = 0.0;
    do {
      z = rng.normal();
    } while (z == 0.0);
    return dt * dt / (z * z);
  }
  const double mu = dt / m;
  const double lambda = dt * dt;
  const double z = rng.normal();
  const double r = mu * z * z / (2.0 * lambda);
  // Smaller root mu (1 + r - sqrt(r^2 + 2r)), written without cancellation.
  const double small_root = mu / (1.0 + r + std::sqrt(r * (r + 2.0)));
  if (rng.uniform() * (mu + small_root) <= mu) return small_root;
  return mu * mu / small_root;
}

/// Density p_t(s) of T_t:
///   t e^{tm} / sqrt(2 pi s^3) exp(-(t^2/s + m^2 s)/2),   s > 0.
inline double subordinator_density(double t, double m, double s) {
  detail::require(t > 0.0, "subordinator density: t must be > 0");
  if (s <= 0.0 || std::isinf(s)) return 0.0;
  // tm - (t^2/s + m^2 s)/2 = -(ms - t)^2 / (2s)
  const double d = m * s - t;
  return std::exp(std::log(t) - 0.5 * std::log(2.0 * std::numbers::pi) - 1.5 * std::log(s) -
                  d * d / (2.0 * s));
}

/// P(T_t <= s) by adaptive quadrature of the density.
inline double subordinator_cdf(double t, double m, double s) {
  detail::require(t > 0.0, "subordinator cdf: t must be > 0");
  if (s <= 0.0) return 0.0;
  auto f = [t, m](double u) { return subordinator_density(t, m, u); };
  QuadratureOptions opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 1e-12;
  // The density is concentrated near its mode; panel at the scale t^2.
  const int panels = std::clamp(static_cast<int>(4.0 * s / (t * t)) + 4, 4, 256);
  return std::min(1.0, integrate(f, 0.0, s, opts, panels).value);
}

inline SubordinatorPath sample_subordinator_path(double t, int n_steps, double m,
                                                 RandomStream& rng) {
  detail::require(n_steps >= 1, "subordinator path: n_steps must be >= 1");
  detail::require(t >= 0.0, "subordinator path: t must be >= 0");
  SubordinatorPath path;
  path.t_final = t;
  path.mass = m;
  path.s_grid.resize(n_steps + 1);
  path.values.resize(n_steps + 1);
  const double ds = t / n_steps;
  path.s_grid[0] = 0.0;
  path.values[0] = 0.0;
  for (int j = 1; j <= n_steps; ++j) {
    path.s_grid[j] = (j == n_steps) ? t : j * ds;
    path.values[j] = path.values[j - 1] + sample_subordinator_increment(ds, m, rng);
  }
  return path;
}

// ---------------------------------------------------------------------------
// Brownian motion and Poisson jumps

inline BrownianPath sample_brownian_on_grid(const Vec3& start, std::span<const double> times,
                                            RandomStream& rng) {
  detail::require(!times.empty() && times.front() == 0.0,
                  "brownian path: grid must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    detail::require(times[i] > times[i - 1], "brownian path: grid must be strictly increasing");
  }
  BrownianPath path;
  path.start = start;
  path.times.assign(times.begin(), times.end());
  path.values.resize(times.size());
  path.values[0] = start;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double sd = std::sqrt(times[i] - times[i - 1]);
    Vec3 next = path.values[i - 1];
    for (int k = 0; k < 3; ++k) next[k] += sd * rng.normal();
    path.values[i] = next;
  }
  return path;
}

/// Jump times of a unit-rate Poisson process on (0, horizon], built from
/// exponential gaps.
inline JumpSet sample_jumps(double horizon, RandomStream& rng) {
  detail::require(horizon >= 0.0, "jumps: horizon must be >= 0");
  JumpSet set;
  set.horizon = horizon;
  double t = rng.exponential();
  while (t <= horizon) {
    set.jump_times.push_back(t);
    t += rng.exponential();
  }
  return set;
}

/// As above, but gives up once more than max_count jumps have occurred.
inline bool sample_jumps(double horizon, RandomStream& rng, std::size_t max_count, JumpSet& out) {
  detail::require(horizon >= 0.0, "jumps: horizon must be >= 0");
  out.horizon = horizon;
  out.jump_times.clear();
  double t = rng.exponential();
  while (t <= horizon) {
    if (out.jump_times.size() >= max_count) return false;
    out.jump_times.push_back(t);
    t += rng.exponential();
  }
  return true;
}

namespace detail {

inline int spin_from_count(int alpha, std::size_t count) {
  return ((alpha + count) % 2 == 0) ? 1 : -1;
}

inline void check_spin_time(const SpinTrack& track, double s) {
  require(s >= 0.0 && s <= track.jumps.horizon, "spin value: s outside [0, horizon]");
}

}  // namespace detail

/// theta_s = (-1)^(alpha + #{jumps in (0, s]}).
inline int spin_value(const SpinTrack& track, double s) {
  detail::check_spin_time(track, s);
  const auto& j = track.jumps.jump_times;
  const auto count = static_cast<std::size_t>(std::upper_bound(j.begin(), j.end(), s) - j.begin());
  return detail::spin_from_count(track.alpha, count);
}

/// Left limit theta_{s-}: counts jumps in (0, s).
inline int spin_value_left(const SpinTrack& track, double s) {
  detail::check_spin_time(track, s);
  const auto& j = track.jumps.jump_times;
  const auto count = static_cast<std::size_t>(std::lower_bound(j.begin(), j.end(), s) - j.begin());
  return detail::spin_from_count(track.alpha, count);
}

// ---------------------------------------------------------------------------
// Law of B_{T_t}

/// Density of B_{T_t} at x:
///   e^{mt} m^2 t / (2 pi^2 (t^2 + |x|^2)) K_2(m sqrt(|x|^2 + t^2)),
/// with the m -> 0 limit t / (pi^2 (t^2 + |x|^2)^2).
inline double relativistic_kernel_radial(double t, double m, double r) {
  detail::require(t > 0.0, "relativistic kernel: t must be > 0");
  const double q = t * t + r * r;
  if (m == 0.0) return t / (std::numbers::pi * std::numbers::pi * q * q);
  const double z = m * std::sqrt(q);
  // e^{mt} K_2(z) = e^{mt - z} (e^z K_2(z)), and mt - z <= 0.
  return 2.0 * (m / (2.0 * std::numbers::pi)) * (m / (2.0 * std::numbers::pi)) * t / q *
         bessel_k2_scaled(z) * std::exp(m * t - z);
}

inline double relativistic_kernel(double t, double m, const Vec3& x) {
  return relativistic_kernel_radial(t, m, norm(x));
}

/// Tabulated P(|B_{T_t}| <= r): cumulative quadrature of 4 pi r^2 P_t(r)
/// on a uniform grid, cubic Hermite interpolation between nodes (the
/// derivative is the radial density itself).  Beyond the table the tail is
/// integrated directly.
class KernelRadialCdf {
 public:
  KernelRadialCdf(double t, double m, double r_max = -1.0, double step = -1.0) : t_(t), m_(m) {
    detail::require(t > 0.0, "kernel cdf: t must be > 0");
    if (r_max <= 0.0) r_max = (m > 0.0) ? t + 60.0 / m : 200.0 * t;
    if (step <= 0.0) step = std::min(0.02 * t, r_max / 2000.0);
    const auto n = static_cast<std::size_t>(std::ceil(r_max / step));
    step_ = r_max / static_cast<double>(n);
    nodes_.resize(n + 1);
    slopes_.resize(n + 1);
    auto density = [this](double r) { return radial_density(r); };
    QuadratureOptions opts;
    opts.rel_tol = 1e-12;
    opts.abs_tol = 1e-15;
    double acc = 0.0;
    nodes_[0] = 0.0;
    slopes_[0] = density(0.0);
    for (std::size_t i = 1; i <= n; ++i) {
      acc += integrate(density, (i - 1) * step_, i * step_, opts).value;
      nodes_[i] = acc;
      slopes_[i] = density(i * step_);
    }
    r_max_ = n * step_;
  }

  double radial_density(double r) const {
    return 4.0 * std::numbers::pi * r * r * relativistic_kernel_radial(t_, m_, r);
  }

  double operator()(double r) const {
    if (r <= 0.0) return 0.0;
    if (r >= r_max_) {
      auto density = [this](double u) { return radial_density(u); };
      QuadratureOptions opts;
      opts.abs_tol = 1e-14;
      return std::clamp(1.0 - integrate_to_infinity(density, r, opts).value, 0.0, 1.0);
    }
    const auto i = std::min(static_cast<std::size_t>(r / step_), nodes_.size() - 2);
    const double h = step_;
    const double s = (r - i * h) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return std::clamp(h00 * nodes_[i] + h10 * h * slopes_[i] + h01 * nodes_[i + 1] +
                          h11 * h * slopes_[i + 1],
                      0.0, 1.0);
  }

  double table_mass() const { return nodes_.back(); }

 private:
  double t_;
  double m_;
  double step_ = 0.0;
  double r_max_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> slopes_;
};

}  // namespace fkspin

// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * Monte Carlo estimators of semigroup quantities built on fk_weight.
 *
 * Sample i draws all of its randomness from streams keyed by
 * (seed, i, role).  Samples are reduced in fixed-size chunks and the chunk
 * partials merged in index order, so an Estimate is bit-identical for any
 * worker count.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "fkspin/errors.hpp"
#include "fkspin/fields.hpp"
#include "fkspin/fk_action.hpp"
#include "fkspin/levy_paths.hpp"
#include "fkspin/rng.hpp"
#include "fkspin/test_functions.hpp"

namespace fkspin {

struct ExperimentSpec {
  double t = 1.0;
  FieldConfig fields;
  double mass = 1.0;
  Mode mode = Mode::spinless;
  double epsilon = 0.0;
  std::uint64_t n_samples = 100000;
  std::uint64_t seed = 1;
  Discretization disc;
  unsigned workers = 1;

  void validate() const {
    detail::require(t >= 0.0 && std::isfinite(t), "experiment: t must be >= 0");
    detail::require(mass >= 0.0, "experiment: mass must be >= 0");
    detail::require(epsilon >= 0.0, "experiment: epsilon must be >= 0");
    detail::require(n_samples >= 1, "experiment: n_samples must be >= 1");
    detail::require(disc.n_subordinator_steps >= 1, "experiment: n_subordinator_steps must be >= 1");
    detail::require(disc.bm_max_step > 0.0, "experiment: bm_max_step must be > 0");
    detail::require(workers >= 1, "experiment: workers must be >= 1");
  }

  /// Spin mode carries e^{T_t} and the jump products; their variance is
  /// controlled only when m_* < m^2 / 2.
  bool finite_variance_guarantee() const {
    if (mode == Mode::spinless) return true;
    return SpinCoupling{fields.b}.m_star() < 0.5 * mass * mass;
  }

  /// Whether the Brownian grid must be refined to bm_max_step.
  bool needs_fine_grid() const {
    return !fields.a.is_zero() || (mode == Mode::spin && !fields.b.b3_is_constant());
  }
};

struct Estimate {
  std::complex<double> mean;
  double std_error = 0.0;
  std::uint64_t n = 0;
  std::uint64_t invalid_count = 0;
  double zero_hit_fraction = 0.0;
  bool finite_variance_guarantee = true;
};

struct SampleOutcome {
  std::complex<double> value;
  bool valid = true;
  bool zero_hit = false;
};

namespace detail {

/// Running (mean, sum of squared deviations) over complex samples; the
/// variance is that of |z - mean|^2.
struct Moments {
  std::uint64_t n = 0;
  double mean_re = 0.0;
  double mean_im = 0.0;
  double m2 = 0.0;
  std::uint64_t invalid = 0;
  std::uint64_t zero_hits = 0;

  void add(std::complex<double> v) {
    ++n;
    const double dr = v.real() - mean_re;
    const double di = v.imag() - mean_im;
    mean_re += dr / static_cast<double>(n);
    mean_im += di / static_cast<double>(n);
    m2 += dr * (v.real() - mean_re) + di * (v.imag() - mean_im);
  }

  void merge(const Moments& o) {
    invalid += o.invalid;
    zero_hits += o.zero_hits;
    if (o.n == 0) return;
    if (n == 0) {
      n = o.n;
      mean_re = o.mean_re;
      mean_im = o.mean_im;
      m2 = o.m2;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double dr = o.mean_re - mean_re;
    const double di = o.mean_im - mean_im;
    const double w = static_cast<double>(o.n) / total;
    mean_re += dr * w;
    mean_im += di * w;
    m2 += o.m2 + (dr * dr + di * di) * static_cast<double>(n) * w;
    n += o.n;
  }
};

inline constexpr std::uint64_t kChunkSize = 4096;
inline constexpr double kMaxInvalidFraction = 1e-3;

template <class SampleFn>
Moments reduce_samples(std::uint64_t n_samples, unsigned workers, const SampleFn& sample) {
  const std::uint64_t n_chunks = (n_samples + kChunkSize - 1) / kChunkSize;
  std::vector<Moments> partial(n_chunks);
  auto run_chunk = [&](std::uint64_t c) {
    Moments m;
    const std::uint64_t end = std::min(n_samples, (c + 1) * kChunkSize);
    for (std::uint64_t i = c * kChunkSize; i < end; ++i) {
      const SampleOutcome s = sample(i);
      if (!s.valid) {
        ++m.invalid;
        continue;
      }
      if (s.zero_hit) ++m.zero_hits;
      m.add(s.value);
    }
    partial[c] = m;
  };
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, workers), n_chunks));
  if (n_threads <= 1) {
    for (std::uint64_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      pool.emplace_back([&] {
        for (std::uint64_t c = next++; c < n_chunks; c = next++) run_chunk(c);
      });
    }
  }
  Moments total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

inline Estimate finish(const Moments& m, std::uint64_t n_samples, bool guarantee) {
  if (static_cast<double>(m.invalid) > kMaxInvalidFraction * static_cast<double>(n_samples)) {
    std::ostringstream msg;
    msg << "invalid-sample fraction " << static_cast<double>(m.invalid) / n_samples
        << " exceeds cap " << kMaxInvalidFraction;
    throw NumericalError(msg.str());
  }
  Estimate e;
  e.mean = {m.mean_re, m.mean_im};
  e.n = m.n;
  e.invalid_count = m.invalid;
  e.std_error = m.n > 1 ? std::sqrt(m.m2 / static_cast<double>(m.n - 1) / static_cast<double>(m.n)) : 0.0;
  e.zero_hit_fraction = m.n > 0 ? static_cast<double>(m.zero_hits) / static_cast<double>(m.n) : 0.0;
  e.finite_variance_guarantee = guarantee;
  return e;
}

inline BundleOptions bundle_options(const ExperimentSpec& spec) {
  BundleOptions o;
  o.with_jumps = spec.mode == Mode::spin;
  o.refine = spec.needs_fine_grid();
  return o;
}

/// Weight times g(q_t) for one path started at (x, alpha).
inline SampleOutcome weighted_endpoint(const ExperimentSpec& spec, const BundleOptions& opts,
                                       const Vec3& x, int alpha, const TestFunction& g,
                                       std::uint64_t index, std::complex<double> prefactor) {
  PathBundle bundle;
  if (!sample_bundle(x, alpha, spec.t, spec.mass, spec.disc, opts, spec.seed, index, bundle)) {
    return {{}, false, false};
  }
  const FkWeight w = fk_weight(bundle, spec.fields, spec.epsilon, spec.mode);
  if (w.zero_hit) return {{0.0, 0.0}, true, true};
  if (!w.valid) return {{}, false, false};
  const std::complex<double> gv =
      spec.mode == Mode::spin ? g(bundle.endpoint(), bundle.final_spin()) : g.spatial(bundle.endpoint());
  const std::complex<double> v = prefactor * w.value() * gv;
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return {{}, false, false};
  return {v, true, false};
}

}  // namespace detail

/// Generic deterministic reduction over sample indices 0..n_samples-1.
template <class SampleFn>
Estimate run_estimator(std::uint64_t n_samples, unsigned workers, const SampleFn& sample,
                       bool guarantee = true) {
  detail::require(n_samples >= 1, "run_estimator: n_samples must be >= 1");
  return detail::finish(detail::reduce_samples(n_samples, workers, sample), n_samples, guarantee);
}

/// (e^{-t(H+V)} g)(x, (-1)^alpha) = E^{x,alpha,0}[e^{T_t} g(q_t) e^S].  In
/// spinless mode, (e^{-t(H_spinless+V)} g)(x) and alpha is ignored.
inline Estimate apply_semigroup(const Vec3& x, int alpha, const TestFunction& g,
                                const ExperimentSpec& spec) {
  spec.validate();
  detail::require(alpha == 0 || alpha == 1, "apply_semigroup: alpha must be 0 or 1");
  const auto opts = detail::bundle_options(spec);
  return run_estimator(
      spec.n_samples, spec.workers,
      [&](std::uint64_t i) { return detail::weighted_endpoint(spec, opts, x, alpha, g, i, 1.0); },
      spec.finite_variance_guarantee());
}

/// (f, e^{-t(H+V)} g) with x drawn from f's sampling density and, in spin
/// mode, alpha uniform on {0, 1}.
inline Estimate matrix_element(const TestFunction& f, const TestFunction& g,
                               const ExperimentSpec& spec) {
  spec.validate();
  const auto opts = detail::bundle_options(spec);
  return run_estimator(
      spec.n_samples, spec.workers,
      [&](std::uint64_t i) {
        RandomStream start_rng(spec.seed, i, StreamRole::start_point);
        const Vec3 x = f.sample(start_rng);
        int alpha = 0;
        double spin_weight = 1.0;
        if (spec.mode == Mode::spin) {
          RandomStream spin_rng(spec.seed, i, StreamRole::start_spin);
          alpha = spin_rng.uniform() < 0.5 ? 0 : 1;
          spin_weight = 2.0 * f.spin_factor(alpha == 0 ? 1 : -1);
          if (spin_weight == 0.0) return SampleOutcome{{0.0, 0.0}, true, false};
        }
        const auto pre = std::conj(f.importance_weight(x)) * spin_weight;
        return detail::weighted_endpoint(spec, opts, x, alpha, g, i, pre);
      },
      spec.finite_variance_guarantee());
}

// ---------------------------------------------------------------------------
// Characteristic function and exponential moments

/// E^{0,0,0}[e^{i xi.B_{T_t}} e^{i z theta_{T_t}}]
///   = e^{-t(sqrt(|xi|^2+m^2)-m)} cos z + i e^{-t(sqrt(|xi|^2+4+m^2)-m)} sin z
inline std::complex<double> characteristic_exact(double t, double m, const Vec3& xi, double z) {
  detail::require(t >= 0.0, "characteristic_exact: t must be >= 0");
  const double k2 = norm2(xi);
  return {std::exp(-t * (std::sqrt(k2 + m * m) - m)) * std::cos(z),
          std::exp(-t * (std::sqrt(k2 + 4.0 + m * m) - m)) * std::sin(z)};
}

/// E[e^{i xi.B_{T_t}} e^{i z theta_t}] from the start (0, alpha = 0).  No
/// fields act, so the Brownian path is drawn at T_t only.  Paths with more
/// than disc.max_grid_points jumps count as invalid.
inline Estimate characteristic_mc(double t, double m, const Vec3& xi, double z,
                                  const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.t = t;
  s.mass = m;
  s.validate();
  return run_estimator(s.n_samples, s.workers, [&](std::uint64_t i) {
    RandomStream sub_rng(s.seed, i, StreamRole::subordinator);
    RandomStream bm_rng(s.seed, i, StreamRole::brownian);
    RandomStream jump_rng(s.seed, i, StreamRole::jumps);
    const double T = sample_subordinator_path(s.t, s.disc.n_subordinator_steps, s.mass, sub_rng).final_value();
    JumpSet jumps;
    if (!sample_jumps(T, jump_rng, s.disc.max_grid_points, jumps)) return SampleOutcome{{}, false, false};
    const std::vector<double> grid{0.0, T};
    const Vec3 b = sample_brownian_on_grid(Vec3{}, grid, bm_rng).values.back();
    const int theta = detail::spin_from_count(0, jumps.jump_times.size());
    return SampleOutcome{std::polar(1.0, dot(xi, b) + z * theta), true, false};
  });
}

struct ExpMoment {
  Estimate mc;
  std::optional<double> closed_form;  // e^{t(m - sqrt(m^2 - 2c))} when c < m^2/2
  bool divergent = false;
};

/// E[e^{c T_t}] for c = q m_*, by Monte Carlo and in closed form.
inline ExpMoment exp_moment(double c, double t, double m, const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.t = t;
  s.mass = m;
  s.validate();
  ExpMoment out;
  out.mc = run_estimator(s.n_samples, s.workers, [&](std::uint64_t i) {
    RandomStream rng(s.seed, i, StreamRole::subordinator);
    const auto path = sample_subordinator_path(s.t, s.disc.n_subordinator_steps, s.mass, rng);
    const double v = std::exp(c * path.final_value());
    return SampleOutcome{v, std::isfinite(v), false};
  });
  if (c < 0.5 * m * m) {
    out.closed_form = std::exp(t * (m - std::sqrt(m * m - 2.0 * c)));
  } else {
    out.divergent = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Derived checks

struct EnergyEstimate {
  double energy = 0.0;
  double std_error = 0.0;
  Estimate u1;
  Estimate u2;
};

/// -log(u(t2)/u(t1)) / (t2 - t1) with u(t) = (e^{-t(H+V)} g)(x0).
inline EnergyEstimate ground_state_energy(const ExperimentSpec& spec, const Vec3& x0,
                                          const TestFunction& g, double t1, double t2) {
  detail::require(t1 > 0.0 && t2 > t1, "ground_state_energy: need 0 < t1 < t2");
  ExperimentSpec s = spec;
  EnergyEstimate out;
  s.t = t1;
  out.u1 = apply_semigroup(x0, 0, g, s);
  s.t = t2;
  out.u2 = apply_semigroup(x0, 0, g, s);
  const double u1 = out.u1.mean.real();
  const double u2 = out.u2.mean.real();
  if (!(u1 > 0.0 && u2 > 0.0)) throw NumericalError("ground_state_energy: non-positive semigroup value");
  const double r1 = out.u1.std_error / u1;
  const double r2 = out.u2.std_error / u2;
  if (r1 >= 0.05 || r2 >= 0.05) throw NumericalError("ground_state_energy: ratio is noise-dominated");
  out.energy = -std::log(u2 / u1) / (t2 - t1);
  out.std_error = std::hypot(r1, r2) / (t2 - t1);
  return out;
}

struct DiamagneticResult {
  Estimate lhs;  // (f, e^{-t(H+V)} g)
  Estimate rhs;  // (|f|, e^{-t(H_b0+V)} |g|)
  double lhs_modulus = 0.0;
  double combined_std_error = 0.0;
  bool holds = false;
};

/// |(f, e^{-t(H+V)} g)| <= (|f|, e^{-t(H_b0+V)} |g|), both sides estimated
/// from the same seed.  In spinless mode the reference drops a only.
inline DiamagneticResult diamagnetic_check(const TestFunction& f, const TestFunction& g,
                                           const ExperimentSpec& spec) {
  DiamagneticResult out;
  out.lhs = matrix_element(f, g, spec);
  ExperimentSpec ref = spec;
  ref.fields = diamagnetic_reference(spec.fields);
  out.rhs = matrix_element(f.modulus(), g.modulus(), ref);
  out.lhs_modulus = std::abs(out.lhs.mean);
  out.combined_std_error = std::hypot(out.lhs.std_error, out.rhs.std_error);
  out.holds = out.lhs_modulus <= out.rhs.mean.real() + 3.0 * out.combined_std_error;
  return out;
}

}  // namespace fkspin

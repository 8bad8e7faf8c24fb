// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Bound-state experiments: martingale constancy of Y_t, the stopped bound,
// decay-rate constants and tail fits of lattice eigenvectors.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "fkspin/errors.hpp"
#include "fkspin/fk_action.hpp"
#include "fkspin/lattice_oracle.hpp"
#include "fkspin/mc_engine.hpp"

namespace fkspin {

// ---------------------------------------------------------------------------
// Rate constants

struct RateBounds {
  double m_star = 0.0;
  double E = 0.0;
  double m = 0.0;
  double m_epsilon = 0.0;
  /// m - sqrt(m^2 - 2 m_*) < -2E; empty when m^2 <= 2 m_*.
  std::optional<bool> condition_n34;
};

inline RateBounds rate_bounds(double E, double m, double m_star) {
  detail::require(E < 0.0, "rate_bounds: E must be < 0");
  detail::require(m >= 0.0, "rate_bounds: m must be >= 0");
  detail::require(m_star >= 0.0, "rate_bounds: m_star must be >= 0");
  RateBounds r{m_star, E, m, 0.0, std::nullopt};
  const double a = -E;
  r.m_epsilon = 2.0 * a > m ? m : 2.0 * std::sqrt(std::max(0.0, m * a - a * a));
  if (m * m > 2.0 * m_star) r.condition_n34 = m - std::sqrt(m * m - 2.0 * m_star) < 2.0 * a;
  return r;
}

// ---------------------------------------------------------------------------
// Tail fits

struct ProfilePoint {
  double r = 0.0;      // radius of the shell's argmax site
  double value = 0.0;  // shell max of |phi|
};

struct FitWindow {
  double r_lo = 0.0;
  double r_hi = 0.0;
};

struct DecayFit {
  double a_hat = 0.0;  // log|phi| ~ log b_hat - a_hat r
  double b_hat = 0.0;
  FitWindow window;
  double r_squared = 0.0;
  int shells = 0;
};

/// Shell maxima of fn over lattice sites, shells being runs of site radii
/// no wider than shell_width (default dx/10).
inline std::vector<ProfilePoint> radial_profile(const Lattice& lattice,
                                                const std::function<double(std::size_t)>& fn,
                                                double shell_width = 0.0) {
  lattice.validate();
  if (shell_width <= 0.0) shell_width = 0.1 * lattice.spacing();
  std::vector<std::pair<double, std::size_t>> sites;
  sites.reserve(lattice.sites());
  for (std::size_t s = 0; s < lattice.sites(); ++s) sites.emplace_back(norm(lattice.position(s)), s);
  std::sort(sites.begin(), sites.end());
  std::vector<ProfilePoint> out;
  double shell_start = -std::numeric_limits<double>::infinity();
  for (const auto& [r, s] : sites) {
    const double v = fn(s);
    if (r - shell_start > shell_width) {
      shell_start = r;
      out.push_back({r, v});
    } else if (v > out.back().value) {
      out.back() = {r, v};
    }
  }
  return out;
}

inline std::vector<ProfilePoint> radial_profile(const BoundState& state, double shell_width = 0.0) {
  return radial_profile(
      state.lattice, [&state](std::size_t s) { return state.site_modulus(s); }, shell_width);
}

/// Least squares of log(value) against r on the window.
inline DecayFit fit_profile(const std::vector<ProfilePoint>& profile, const FitWindow& window) {
  detail::require(window.r_hi > window.r_lo, "fit_decay: empty window");
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : profile) {
    if (p.r < window.r_lo || p.r > window.r_hi || !(p.value > 0.0)) continue;
    xs.push_back(p.r);
    ys.push_back(std::log(p.value));
  }
  if (xs.size() < 8) {
    throw InvalidArgument("fit_decay: window holds " + std::to_string(xs.size()) +
                          " shells, need at least 8");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  DecayFit fit;
  const double slope = sxy / sxx;
  fit.a_hat = -slope;
  fit.b_hat = std::exp(my - slope * mx);
  fit.window = window;
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  fit.shells = static_cast<int>(xs.size());
  return fit;
}

namespace detail {

inline void check_window(const Lattice& lattice, const FitWindow& window) {
  const double limit = 0.5 * lattice.length - 2.0 * lattice.spacing();
  if (window.r_hi > limit + 1e-12) {
    throw InvalidArgument("fit_decay: window reaches within 2 dx of the periodic boundary (r_hi > " +
                          std::to_string(limit) + ")");
  }
}

}  // namespace detail

inline DecayFit fit_decay(const BoundState& state, const FitWindow& window,
                          double shell_width = 0.0) {
  detail::check_window(state.lattice, window);
  return fit_profile(radial_profile(state, shell_width), window);
}

/// Fit of an arbitrary site function, e.g. a planted exponential.
inline DecayFit fit_decay(const Lattice& lattice, const std::function<double(const Vec3&)>& fn,
                          const FitWindow& window, double shell_width = 0.0) {
  detail::check_window(lattice, window);
  return fit_profile(
      radial_profile(lattice, [&](std::size_t s) { return fn(lattice.position(s)); }, shell_width),
      window);
}

inline void write_profile_csv(std::ostream& os, const std::vector<ProfilePoint>& profile) {
  os << "r,shell_max\n" << std::setprecision(17);
  for (const auto& p : profile) os << p.r << ',' << p.value << '\n';
}

// ---------------------------------------------------------------------------
// Martingale scan

enum class Dynamics { relativistic, non_relativistic };

struct MartingaleScan {
  Vec3 x;
  int alpha = 0;
  std::vector<double> t_list;
  std::vector<Estimate> estimates;
  std::complex<double> reference;  // phi_g(x, (-1)^alpha)
  double max_gap = 0.0;            // max_{i<j} |E[Y_ti] - E[Y_tj]|
  double budget = 0.0;
  bool constant = true;
};

namespace detail {

inline int theta_of(int alpha) { return alpha == 0 ? 1 : -1; }

inline std::complex<double> state_value(const BoundState& state, const Vec3& x, int theta) {
  return state.value(x, state.lattice.with_spin ? theta : 1);
}

}  // namespace detail

/// E[Y_t(x, alpha)] for each t, Y_t = e^{tE} e^{T_t} e^S phi_g(q_t).  The
/// non-relativistic variant replaces T_s by s; then state must be the
/// ground state of h + V.  The pairwise check is
///   |E[Y_ti] - E[Y_tj]| <= 3 hypot(se_i, se_j) + budget_rel |phi_g(x)|.
inline MartingaleScan martingale_scan(const ExperimentSpec& spec, const BoundState& state,
                                      const Vec3& x, int alpha, const std::vector<double>& t_list,
                                      double budget_rel = 0.05,
                                      Dynamics dynamics = Dynamics::relativistic) {
  detail::require(alpha == 0 || alpha == 1, "martingale_scan: alpha must be 0 or 1");
  detail::require(!t_list.empty(), "martingale_scan: empty t_list");
  detail::require(budget_rel >= 0.0, "martingale_scan: budget must be >= 0");
  detail::require(state.lattice.with_spin == (spec.mode == Mode::spin),
                  "martingale_scan: bound state and mode disagree on spin");
  MartingaleScan out;
  out.x = x;
  out.alpha = alpha;
  out.t_list = t_list;
  out.reference = detail::state_value(state, x, detail::theta_of(alpha));
  out.budget = budget_rel * std::abs(out.reference);
  for (double t : t_list) {
    ExperimentSpec s = spec;
    s.t = t;
    s.validate();
    auto opts = detail::bundle_options(s);
    opts.deterministic_time = dynamics == Dynamics::non_relativistic;
    const double growth = std::exp(t * state.energy);
    out.estimates.push_back(run_estimator(
        s.n_samples, s.workers,
        [&](std::uint64_t i) {
          PathBundle bundle;
          if (!sample_bundle(x, alpha, s.t, s.mass, s.disc, opts, s.seed, i, bundle)) {
            return SampleOutcome{{}, false, false};
          }
          const FkWeight w = fk_weight(bundle, s.fields, s.epsilon, s.mode);
          if (w.zero_hit) return SampleOutcome{{0.0, 0.0}, true, true};
          if (!w.valid) return SampleOutcome{{}, false, false};
          const auto v =
              growth * w.value() * detail::state_value(state, bundle.endpoint(), bundle.final_spin());
          return SampleOutcome{v, std::isfinite(v.real()) && std::isfinite(v.imag()), false};
        },
        s.finite_variance_guarantee()));
  }
  for (std::size_t i = 0; i < out.estimates.size(); ++i) {
    for (std::size_t j = i + 1; j < out.estimates.size(); ++j) {
      const double gap = std::abs(out.estimates[i].mean - out.estimates[j].mean);
      out.max_gap = std::max(out.max_gap, gap);
      const double tol =
          3.0 * std::hypot(out.estimates[i].std_error, out.estimates[j].std_error) + out.budget;
      if (gap > tol) out.constant = false;
    }
  }
  return out;
}

inline void write_scan_csv(std::ostream& os, const MartingaleScan& scan) {
  os << "t,re,im,std_error,n,reference_re,reference_im\n" << std::setprecision(17);
  for (std::size_t i = 0; i < scan.t_list.size(); ++i) {
    const auto& e = scan.estimates[i];
    os << scan.t_list[i] << ',' << e.mean.real() << ',' << e.mean.imag() << ',' << e.std_error
       << ',' << e.n << ',' << scan.reference.real() << ',' << scan.reference.imag() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Stopped bound

enum class StopRule {
  none,   // tau = infinity
  exit,   // first s-grid point with |B_{T_s}| > R
  enter,  // first s-grid point with |B_{T_s} + x| <= R
};

struct StoppedBound {
  Estimate rhs_expectation;  // E[e^{(t^tau)E} e^{-int V} e^{m_* T_{t^tau}/2}]
  double sup_norm = 0.0;     // ||phi_g||_inf over the lattice
  double rhs = 0.0;          // rhs_expectation * sup_norm
  double lhs = 0.0;          // |phi_g(x, (-1)^alpha)|
  double budget = 0.0;
  bool holds = false;
};

/// |phi_g(x,(-1)^alpha)| <= E^{0,0}[e^{(t^tau)E} e^{-int_0^{t^tau} V(B_{T_r}+x) dr}
///                                  e^{m_* T_{t^tau}/2}] ||phi_g||_inf,
/// with the Brownian path started at 0 and tau discretised on the s-grid.
inline StoppedBound stopped_bound(const ExperimentSpec& spec, const BoundState& state,
                                  const Vec3& x, int alpha, double t, double R, StopRule rule,
                                  double budget_rel = 0.05) {
  detail::require(alpha == 0 || alpha == 1, "stopped_bound: alpha must be 0 or 1");
  detail::require(rule == StopRule::none || R > 0.0, "stopped_bound: R must be > 0");
  ExperimentSpec s = spec;
  s.t = t;
  s.validate();
  const double m_star = s.mode == Mode::spin ? SpinCoupling{s.fields.b}.m_star() : 0.0;
  const double E = state.energy;
  BundleOptions opts;
  opts.with_jumps = false;
  StoppedBound out;
  out.rhs_expectation = run_estimator(s.n_samples, s.workers, [&](std::uint64_t i) {
    PathBundle bundle;
    if (!sample_bundle(Vec3{}, 0, s.t, s.mass, s.disc, opts, s.seed, i, bundle)) {
      return SampleOutcome{{}, false, false};
    }
    const auto& grid = bundle.sub.s_grid;
    const std::size_t last = grid.size() - 1;
    std::size_t stop = last;
    if (rule != StopRule::none) {
      for (std::size_t j = 0; j <= last; ++j) {
        const Vec3 b = bundle.image(j);
        const bool hit = rule == StopRule::exit ? norm(b) > R : norm(b + x) <= R;
        if (hit) {
          stop = j;
          break;
        }
      }
    }
    double log_w = grid[stop] * E + 0.5 * m_star * bundle.sub.values[stop];
    for (std::size_t j = 0; j < stop; ++j) log_w -= s.fields.V(bundle.image(j) + x) * (grid[j + 1] - grid[j]);
    const double v = std::exp(log_w);
    return SampleOutcome{v, std::isfinite(v), false};
  });
  for (std::size_t site = 0; site < state.lattice.sites(); ++site) {
    out.sup_norm = std::max(out.sup_norm, state.site_modulus(site));
  }
  out.rhs = out.rhs_expectation.mean.real() * out.sup_norm;
  out.lhs = std::abs(detail::state_value(state, x, detail::theta_of(alpha)));
  out.budget = budget_rel * out.lhs;
  out.holds = out.lhs <= out.rhs + 3.0 * out.rhs_expectation.std_error * out.sup_norm + out.budget;
  return out;
}

}  // namespace fkspin

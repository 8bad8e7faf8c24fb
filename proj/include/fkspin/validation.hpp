// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Analytic-identity suite behind `fkspin validate`.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fkspin/levy_paths.hpp"
#include "fkspin/mc_engine.hpp"

namespace fkspin {

/// sup_x |F_n(x) - F(x)| for the empirical CDF of samples (sorted in place).
inline double ks_statistic(std::vector<double>& samples, const std::function<double(double)>& cdf) {
  detail::require(!samples.empty(), "ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

struct CheckResult {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  std::uint64_t n_samples = 100000;
  unsigned workers = 1;
  int n_subordinator_steps = 16;
};

namespace detail {

inline std::string label(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

inline CheckResult within(std::string name, double value, double reference, double tol) {
  return {std::move(name), value, reference, tol, std::abs(value - reference) <= tol};
}

inline std::vector<double> final_subordinator_values(const SuiteOptions& o, double t, double m) {
  std::vector<double> out(o.n_samples);
  for (std::uint64_t i = 0; i < o.n_samples; ++i) {
    RandomStream rng(o.seed, i, StreamRole::subordinator);
    out[i] = sample_subordinator_path(t, o.n_subordinator_steps, m, rng).final_value();
  }
  return out;
}

}  // namespace detail

/// Densities, Laplace transform, kernel law, characteristic function and
/// exponential moments against their closed forms.
inline std::vector<CheckResult> run_validation_suite(const SuiteOptions& o) {
  std::vector<CheckResult> out;
  const double ks_tol = 0.01;

  for (double m : {0.0, 1.0, 2.0}) {
    auto samples = detail::final_subordinator_values(o, 1.0, m);
    const double d = ks_statistic(samples, [m](double s) { return subordinator_cdf(1.0, m, s); });
    out.push_back({"subordinator_ks m=" + detail::label(m), d, 0.0, ks_tol, d < ks_tol});
  }

  for (double m : {0.0, 1.0}) {
    for (double t : {0.5, 1.0}) {
      const auto values = detail::final_subordinator_values(o, t, m);
      for (double u : {0.5, 1.0, 2.0}) {
        const Estimate e = run_estimator(o.n_samples, o.workers, [&](std::uint64_t i) {
          return SampleOutcome{std::exp(-u * values[i]), true, false};
        });
        const double ref = std::exp(-t * (std::sqrt(2.0 * u + m * m) - m));
        out.push_back(detail::within("laplace m=" + detail::label(m) + " t=" + detail::label(t) +
                                         " u=" + detail::label(u),
                                     e.mean.real(), ref, 3.0 * e.std_error));
      }
    }
  }

  for (double m : {0.0, 1.0}) {
    const KernelRadialCdf cdf(1.0, m);
    std::vector<double> radii(o.n_samples);
    for (std::uint64_t i = 0; i < o.n_samples; ++i) {
      RandomStream sub_rng(o.seed, i, StreamRole::subordinator);
      RandomStream bm_rng(o.seed, i, StreamRole::brownian);
      const double T = sample_subordinator_path(1.0, o.n_subordinator_steps, m, sub_rng).final_value();
      const std::vector<double> grid{0.0, T};
      radii[i] = norm(sample_brownian_on_grid(Vec3{}, grid, bm_rng).values.back());
    }
    const double d = ks_statistic(radii, [&cdf](double r) { return cdf(r); });
    out.push_back({"kernel_ks m=" + detail::label(m), d, 0.0, ks_tol, d < ks_tol});
  }

  ExperimentSpec spec;
  spec.seed = o.seed;
  spec.n_samples = o.n_samples;
  spec.workers = o.workers;
  spec.disc.n_subordinator_steps = o.n_subordinator_steps;
  // m = 0 is left out: the jump count then has infinite mean.
  for (double m : {1.0, 2.0}) {
    for (const Vec3& xi : {Vec3{}, Vec3{1.0, 0.0, 0.0}, Vec3{0.5, -1.0, 0.5}}) {
      for (double z : {0.0, 1.0, 0.5 * std::numbers::pi}) {
        const Estimate e = characteristic_mc(1.0, m, xi, z, spec);
        const auto ref = characteristic_exact(1.0, m, xi, z);
        const double err = std::abs(e.mean - ref);
        out.push_back({"characteristic m=" + detail::label(m) + " |xi|=" +
                           detail::label(norm(xi)) + " z=" + detail::label(z),
                       err, 0.0, 3.0 * e.std_error, err <= 3.0 * e.std_error});
      }
    }
  }

  // Parameters with 2c < m^2/2 so the estimator has finite variance.
  for (auto [t, m, c] : {std::array<double, 3>{1.0, 2.0, 0.75}, std::array<double, 3>{2.0, 1.0, 0.2}}) {
    const ExpMoment r = exp_moment(c, t, m, spec);
    out.push_back(detail::within("exp_moment t=" + detail::label(t) + " m=" + detail::label(m) +
                                     " c=" + detail::label(c),
                                 r.mc.mean.real(), *r.closed_form, 3.0 * r.mc.std_error));
  }
  return out;
}

}  // namespace fkspin

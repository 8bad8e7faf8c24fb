// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fkspin/errors.hpp"
#include "fkspin/quadrature.hpp"

namespace fkspin {

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// e^x K_2(x) from the integral representation
///   K_2(x) = 1/2 int_0^inf xi exp(-(xi + 1/xi) x / 2) dxi.
/// Splitting at xi = 1 and substituting xi = e^{+-u} folds both halves into
///   K_2(x) = int_0^inf cosh(2u) exp(-x cosh u) du,
/// whose integrand decays doubly exponentially in u.
inline double bessel_k2_scaled(double x) {
  detail::require(x > 0.0 && std::isfinite(x), "bessel_k2: x must be positive");
  auto integrand = [x](double u) {
    // cosh(u) - 1 = 2 sinh^2(u/2) keeps the exponent exact near u = 0.
    const double sh = std::sinh(0.5 * u);
    return std::cosh(2.0 * u) * std::exp(-2.0 * x * sh * sh);
  };
  // Cut where the integrand is ~e^-40 below the size of the integral.
  const double log_scale =
      std::log(std::max(std::sqrt(std::numbers::pi / (2.0 * x)), 2.0 / (x * x)));
  double upper = 0.5;
  for (;;) {
    const double sh = std::sinh(0.5 * upper);
    const double log_f = 2.0 * upper - 2.0 * x * sh * sh;
    const bool past_peak = x * std::sinh(upper) > 2.0;
    if (past_peak && log_f < log_scale - 40.0) break;
    upper += 0.25;
  }
  const int panels = std::max(4, static_cast<int>(2.0 * upper));
  QuadratureOptions opts;
  opts.rel_tol = 1e-14;
  return integrate(integrand, 0.0, upper, opts, panels).value;
}

/// Modified Bessel function of the third kind, order 2.
inline double bessel_k2(double x) {
  return bessel_k2_scaled(x) * std::exp(-x);
}

}  // namespace fkspin

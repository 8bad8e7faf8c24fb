// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Globally adaptive 15-point Gauss-Kronrod quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "fkspin/errors.hpp"

namespace fkspin {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

struct QuadratureOptions {
  double abs_tol = 0.0;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

namespace detail {

// Kronrod abscissae (descending, last is the centre) and weights; the Gauss
// weights belong to the odd-indexed abscissae.
inline constexpr std::array<double, 8> kGkNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kGkNodes[i];
    const double sum = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Integrate f over [a, b], optionally pre-split into `initial_panels`
/// equal pieces.
template <class F>
QuadratureResult integrate(F f, double a, double b, QuadratureOptions opts = {},
                           int initial_panels = 1) {
  detail::require(std::isfinite(a) && std::isfinite(b),
                  "integrate: finite limits required");
  if (a == b) return {};
  std::priority_queue<detail::Panel> heap;
  double value = 0.0;
  double error = 0.0;
  const double width = (b - a) / initial_panels;
  for (int i = 0; i < initial_panels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == initial_panels) ? b : lo + width;
    auto p = detail::gk15(f, lo, hi);
    value += p.value;
    error += p.error;
    heap.push(p);
  }
  int count = initial_panels;
  while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(value)) &&
         count < opts.max_intervals) {
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    const auto left = detail::gk15(f, worst.a, mid);
    const auto right = detail::gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Re-sum to shed the drift of the running updates.
  value = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  return {value, error, count};
}

/// Integrate f over [a, inf) via x = a + u / (1 - u).
template <class F>
QuadratureResult integrate_to_infinity(F f, double a, QuadratureOptions opts = {},
                                       int initial_panels = 8) {
  auto g = [&](double u) {
    const double one_minus = 1.0 - u;
    const double x = a + u / one_minus;
    const double jac = 1.0 / (one_minus * one_minus);
    const double v = f(x) * jac;
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(g, 0.0, 1.0, opts, initial_panels);
}

}  // namespace fkspin

// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * Builtin parametric field families.  The vector potential a and the
 * magnetic field b are chosen independently; b is not derived from a.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <variant>

#include "fkspin/errors.hpp"
#include "fkspin/vec3.hpp"

namespace fkspin {

// ---------------------------------------------------------------------------
// Vector potential

struct ZeroPotentialA {};
struct ConstantA {
  Vec3 value;
};
/// a(x) = b x (x - c) / 2, the symmetric gauge of a constant field b.
struct LinearGaugeA {
  Vec3 b;
  Vec3 center;
};
/// a(x) = grad chi with chi(x) = kappa |x - c|^2 / 2.
struct GradientA {
  double kappa = 1.0;
  Vec3 center;
};

using VectorPotentialFamily = std::variant<ZeroPotentialA, ConstantA, LinearGaugeA, GradientA>;

struct VectorPotential {
  VectorPotentialFamily family = ZeroPotentialA{};

  Vec3 operator()(const Vec3& x) const {
    return std::visit(
        [&x](const auto& f) -> Vec3 {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, ZeroPotentialA>) {
            return {};
          } else if constexpr (std::is_same_v<T, ConstantA>) {
            return f.value;
          } else if constexpr (std::is_same_v<T, LinearGaugeA>) {
            return 0.5 * cross(f.b, x - f.center);
          } else {
            return f.kappa * (x - f.center);
          }
        },
        family);
  }

  bool is_zero() const { return std::holds_alternative<ZeroPotentialA>(family); }
};

// ---------------------------------------------------------------------------
// Magnetic field

struct ZeroB {};
struct ConstantB {
  Vec3 value;
};
/// amplitude * exp(-|x - c|^2 / (2 w^2)) inside |x - c| < cutoff * w, zero
/// outside.  The compact support gives W a genuine zero set.
struct GaussianBumpB {
  Vec3 amplitude;
  Vec3 center;
  double width = 1.0;
  double cutoff = 3.0;
};
/// b_mu(x) = gradient[mu] . x  (unbounded; used with truncation).
struct LinearB {
  std::array<Vec3, 3> gradient;
};

using MagneticFamily = std::variant<ZeroB, ConstantB, GaussianBumpB, LinearB>;

struct MagneticField {
  MagneticFamily family = ZeroB{};
  /// Componentwise clamp level N of b^(N).
  std::optional<double> clamp;
  /// Replace b by b0 = (sqrt(b1^2 + b2^2), 0, b3).
  bool fold_to_b0 = false;

  Vec3 operator()(const Vec3& x) const {
    Vec3 b = std::visit(
        [&x](const auto& f) -> Vec3 {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, ZeroB>) {
            return {};
          } else if constexpr (std::is_same_v<T, ConstantB>) {
            return f.value;
          } else if constexpr (std::is_same_v<T, GaussianBumpB>) {
            const double r2 = norm2(x - f.center);
            const double w2 = f.width * f.width;
            if (r2 >= f.cutoff * f.cutoff * w2) return {};
            return std::exp(-0.5 * r2 / w2) * f.amplitude;
          } else {
            return {dot(f.gradient[0], x), dot(f.gradient[1], x), dot(f.gradient[2], x)};
          }
        },
        family);
    if (clamp) {
      for (int k = 0; k < 3; ++k) b[k] = std::clamp(b[k], -*clamp, *clamp);
    }
    if (fold_to_b0) b = {std::hypot(b[0], b[1]), 0.0, b[2]};
    return b;
  }

  bool is_zero() const { return std::holds_alternative<ZeroB>(family); }

  /// b3 takes the same value at every point (so the diagonal spin integral
  /// is exact on any grid containing the jump times).
  bool b3_is_constant() const {
    if (is_zero()) return true;
    if (const auto* c = std::get_if<ConstantB>(&family)) {
      (void)c;
      return true;
    }
    return false;
  }

  /// b1 = b2 = 0 everywhere: spin sectors decouple.
  bool is_longitudinal() const {
    if (is_zero()) return true;
    if (const auto* c = std::get_if<ConstantB>(&family)) return c->value[0] == 0.0 && c->value[1] == 0.0;
    if (const auto* g = std::get_if<GaussianBumpB>(&family))
      return g->amplitude[0] == 0.0 && g->amplitude[1] == 0.0;
    return false;
  }
};

/// b^(N): each component clamped to [-N, N].
inline MagneticField truncate_field(MagneticField b, double level) {
  detail::require(level > 0.0, "truncate_field: level must be > 0");
  b.clamp = b.clamp ? std::min(*b.clamp, level) : level;
  return b;
}

// ---------------------------------------------------------------------------
// Scalar potential

struct ZeroV {};
struct ConstantV {
  double value = 0.0;
};
/// omega^2 |x|^2 / 2
struct HarmonicV {
  double omega = 1.0;
};
/// -depth inside the ball |x| < radius
struct FiniteWellV {
  double depth = 1.0;
  double radius = 1.0;
};
/// -gamma / sqrt(|x|^2 + delta^2)
struct SoftCoulombV {
  double gamma = 1.0;
  double delta = 1.0;
};

using PotentialFamily = std::variant<ZeroV, ConstantV, HarmonicV, FiniteWellV, SoftCoulombV>;

struct Potential {
  PotentialFamily family = ZeroV{};

  double operator()(const Vec3& x) const {
    return std::visit(
        [&x](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, ZeroV>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, ConstantV>) {
            return f.value;
          } else if constexpr (std::is_same_v<T, HarmonicV>) {
            return 0.5 * f.omega * f.omega * norm2(x);
          } else if constexpr (std::is_same_v<T, FiniteWellV>) {
            return norm2(x) < f.radius * f.radius ? -f.depth : 0.0;
          } else {
            return -f.gamma / std::sqrt(norm2(x) + f.delta * f.delta);
          }
        },
        family);
  }

  /// inf_x V(x) (finite for every builtin family).
  double lower_bound() const {
    return std::visit(
        [](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, ZeroV> || std::is_same_v<T, HarmonicV>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, ConstantV>) {
            return f.value;
          } else if constexpr (std::is_same_v<T, FiniteWellV>) {
            return std::min(0.0, -f.depth);
          } else {
            return -std::abs(f.gamma) / std::abs(f.delta);
          }
        },
        family);
  }

  bool is_zero() const { return std::holds_alternative<ZeroV>(family); }
};

struct FieldConfig {
  VectorPotential a;
  MagneticField b;
  Potential V;

  bool is_free() const { return a.is_zero() && b.is_zero() && V.is_zero(); }
};

/// Reference configuration of the energy comparison inequality: a = 0 and
/// b replaced by b0.
inline FieldConfig diamagnetic_reference(FieldConfig fields) {
  fields.a = VectorPotential{};
  fields.b.fold_to_b0 = true;
  return fields;
}

// ---------------------------------------------------------------------------
// Spin coupling

/// Spin interaction on L^2(R^3 x Z_2) derived from b:
///   U_d(x, theta)   = -theta b3(x) / 2
///   U_od(x, -theta) = -(b1(x) - i theta b2(x)) / 2
///   W(x)            = sqrt(b1^2 + b2^2) / 2 = |U_od|
struct SpinCoupling {
  MagneticField b;

  double diagonal(const Vec3& x, int theta) const { return -0.5 * theta * b(x)[2]; }

  /// U_od(x, sigma); the flipped spin sigma is the second argument, so the
  /// coupling seen from spin theta is offdiagonal(x, -theta).
  std::complex<double> offdiagonal(const Vec3& x, int sigma) const {
    const Vec3 v = b(x);
    // sigma = -theta:  -(b1 - i theta b2)/2 = -(b1 + i sigma b2)/2
    return {-0.5 * v[0], -0.5 * sigma * v[1]};
  }

  double w(const Vec3& x) const {
    const Vec3 v = b(x);
    return 0.5 * std::hypot(v[0], v[1]);
  }

  /// m_* = sup|b3| + sup W, estimated on a uniform grid of the box
  /// [-half_width, half_width]^3.  Exact for constant fields.
  double m_star(double half_width = 8.0, int points_per_axis = 41) const {
    if (b.is_zero()) return 0.0;
    double sup_b3 = 0.0;
    double sup_w = 0.0;
    const double h = 2.0 * half_width / (points_per_axis - 1);
    for (int i = 0; i < points_per_axis; ++i) {
      for (int j = 0; j < points_per_axis; ++j) {
        for (int k = 0; k < points_per_axis; ++k) {
          const Vec3 x{-half_width + i * h, -half_width + j * h, -half_width + k * h};
          const Vec3 v = b(x);
          sup_b3 = std::max(sup_b3, std::abs(v[2]));
          sup_w = std::max(sup_w, 0.5 * std::hypot(v[0], v[1]));
        }
      }
    }
    // Bumps peak at their centre, which the grid may straddle.
    if (const auto* g = std::get_if<GaussianBumpB>(&b.family)) {
      const Vec3 v = b(g->center);
      sup_b3 = std::max(sup_b3, std::abs(v[2]));
      sup_w = std::max(sup_w, 0.5 * std::hypot(v[0], v[1]));
    }
    return sup_b3 + sup_w;
  }
};

}  // namespace fkspin

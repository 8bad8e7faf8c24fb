// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <ostream>

namespace fkspin {

/// Point or vector in R^3.
struct Vec3 {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  constexpr Vec3() = default;
  constexpr Vec3(double x, double y, double z) : c{x, y, z} {}

  constexpr double& operator[](int i) { return c[i]; }
  constexpr double operator[](int i) const { return c[i]; }

  constexpr Vec3& operator+=(const Vec3& o) {
    for (int i = 0; i < 3; ++i) c[i] += o.c[i];
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    for (int i = 0; i < 3; ++i) c[i] -= o.c[i];
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Vec3& v) {
    return os << '(' << v.c[0] << ", " << v.c[1] << ", " << v.c[2] << ')';
  }
};

constexpr double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

constexpr double norm2(const Vec3& a) { return dot(a, a); }

inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

}  // namespace fkspin

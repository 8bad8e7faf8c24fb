// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * Desk-scale ground truth on a periodic n^3 lattice (optionally doubled by
 * the spin index):
 *
 *   h = -(1/2) D^2 + U         covariant differences with Peierls phases
 *   H = sqrt(2h + m^2) - m     spectral calculus
 *   e^{-t(H+V)}, lowest eigenpairs of H + V
 *
 * Dense Hermitian eigendecompositions go through LAPACK; real matrices
 * (a = 0, b2 = 0) use the real symmetric drivers.
 */

#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

#include "fkspin/errors.hpp"
#include "fkspin/fields.hpp"
#include "fkspin/vec3.hpp"

namespace fkspin {

struct Lattice {
  int n = 8;
  double length = 8.0;
  bool with_spin = true;

  void validate() const {
    detail::require(n >= 3, "lattice: n must be >= 3");
    detail::require(length > 0.0, "lattice: length must be > 0");
  }

  double spacing() const { return length / n; }
  std::size_t sites() const { return static_cast<std::size_t>(n) * n * n; }
  std::size_t dimension() const { return with_spin ? 2 * sites() : sites(); }

  int wrap(int i) const { return ((i % n) + n) % n; }

  std::size_t site(int i, int j, int k) const {
    return (static_cast<std::size_t>(wrap(i)) * n + wrap(j)) * n + wrap(k);
  }

  std::array<int, 3> coords(std::size_t s) const {
    const int k = static_cast<int>(s % n);
    const int j = static_cast<int>((s / n) % n);
    const int i = static_cast<int>(s / (static_cast<std::size_t>(n) * n));
    return {i, j, k};
  }

  /// Row of (site, theta); theta = +1 occupies the first block.
  std::size_t index(std::size_t s, int theta) const {
    return (!with_spin || theta == 1) ? s : sites() + s;
  }

  /// Sites sit at -L/2 + i dx, so the origin is a site for even n.
  Vec3 position(std::size_t s) const {
    const auto c = coords(s);
    const double h = spacing();
    return {-0.5 * length + c[0] * h, -0.5 * length + c[1] * h, -0.5 * length + c[2] * h};
  }
};

enum class OperatorTag { h, H, H_plus_V, h_b0 };

struct OperatorMatrix {
  Eigen::MatrixXcd data;
  OperatorTag tag = OperatorTag::h;
  Lattice lattice;

  bool is_real() const { return data.imag().cwiseAbs().maxCoeff() == 0.0; }

  /// max |A - A^dagger| / max |A|
  double hermiticity_defect() const {
    const double scale = std::max(1e-300, data.cwiseAbs().maxCoeff());
    return (data - data.adjoint()).cwiseAbs().maxCoeff() / scale;
  }
};

struct Spectrum {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXcd vectors; // columns
};

namespace detail {

inline void check_lapack(lapack_int info, const char* routine) {
  if (info != 0) {
    std::ostringstream msg;
    msg << routine << " failed with info = " << info;
    throw NumericalError(msg.str());
  }
}

}  // namespace detail

/// Full eigendecomposition of a Hermitian matrix.
inline Spectrum eigh(const Eigen::MatrixXcd& a) {
  const auto n = static_cast<lapack_int>(a.rows());
  detail::require(a.rows() == a.cols(), "eigh: square matrix required");
  Spectrum out;
  out.values.resize(n);
  if (a.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::MatrixXd work = a.real();
    detail::check_lapack(
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, work.data(), n, out.values.data()),
        "dsyevd");
    out.vectors = work.cast<std::complex<double>>();
  } else {
    Eigen::MatrixXcd work = a;
    detail::check_lapack(
        LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                       reinterpret_cast<lapack_complex_double*>(work.data()), n,
                       out.values.data()),
        "zheevd");
    out.vectors = std::move(work);
  }
  return out;
}

/// The k lowest eigenpairs.
inline Spectrum eigh_lowest(const Eigen::MatrixXcd& a, int k) {
  const auto n = static_cast<lapack_int>(a.rows());
  detail::require(k >= 1 && k <= n, "eigh_lowest: 1 <= k <= n");
  Spectrum out;
  Eigen::VectorXd w(n);
  lapack_int found = 0;
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  if (a.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::MatrixXd work = a.real();
    Eigen::MatrixXd z(n, k);
    detail::check_lapack(LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, work.data(), n, 0.0,
                                        0.0, 1, k, 0.0, &found, w.data(), z.data(), n,
                                        support.data()),
                         "dsyevr");
    out.vectors = z.leftCols(found).cast<std::complex<double>>();
  } else {
    Eigen::MatrixXcd work = a;
    Eigen::MatrixXcd z(n, k);
    detail::check_lapack(
        LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n,
                       reinterpret_cast<lapack_complex_double*>(work.data()), n, 0.0, 0.0, 1, k,
                       0.0, &found, w.data(), reinterpret_cast<lapack_complex_double*>(z.data()),
                       n, support.data()),
        "zheevr");
    out.vectors = z.leftCols(found);
  }
  if (found != k) throw NumericalError("eigh_lowest: eigensolver returned too few pairs");
  out.values = w.head(found);
  return out;
}

/// V f(Lambda) V^dagger
template <class Fn>
Eigen::MatrixXcd spectral_function(const Spectrum& s, Fn fn) {
  Eigen::VectorXd f(s.values.size());
  for (Eigen::Index i = 0; i < s.values.size(); ++i) f[i] = fn(s.values[i]);
  if (s.vectors.imag().cwiseAbs().maxCoeff() == 0.0) {
    const Eigen::MatrixXd v = s.vectors.real();
    const Eigen::MatrixXd r = v * f.asDiagonal() * v.transpose();
    return r.cast<std::complex<double>>();
  }
  return s.vectors * f.asDiagonal() * s.vectors.adjoint();
}

// ---------------------------------------------------------------------------
// Construction of h

/// Line integral of a along each forward link, [site][mu], midpoint rule.
using LinkPhases = std::vector<std::array<double, 3>>;

inline LinkPhases link_phases(const VectorPotential& a, const Lattice& lattice) {
  lattice.validate();
  LinkPhases phases(lattice.sites(), {0.0, 0.0, 0.0});
  if (a.is_zero()) return phases;
  const double h = lattice.spacing();
  for (std::size_t s = 0; s < lattice.sites(); ++s) {
    const Vec3 x = lattice.position(s);
    for (int mu = 0; mu < 3; ++mu) {
      Vec3 mid = x;
      mid[mu] += 0.5 * h;
      phases[s][mu] = a(mid)[mu] * h;
    }
  }
  return phases;
}

/// h = (1/2) sum_mu (D_mu)^* D_mu + U from explicit link phases.
inline OperatorMatrix build_h(const LinkPhases& phases, const MagneticField& b,
                              const Lattice& lattice) {
  lattice.validate();
  detail::require(phases.size() == lattice.sites(), "build_h: link phase table size mismatch");
  const auto dim = static_cast<Eigen::Index>(lattice.dimension());
  OperatorMatrix out;
  out.tag = b.fold_to_b0 ? OperatorTag::h_b0 : OperatorTag::h;
  out.lattice = lattice;
  out.data = Eigen::MatrixXcd::Zero(dim, dim);
  const double h = lattice.spacing();
  const double hop = 0.5 / (h * h);
  const int n_spin = lattice.with_spin ? 2 : 1;
  const SpinCoupling coupling{b};
  for (std::size_t s = 0; s < lattice.sites(); ++s) {
    const auto c = lattice.coords(s);
    for (int sp = 0; sp < n_spin; ++sp) {
      const int theta = sp == 0 ? 1 : -1;
      const auto row = static_cast<Eigen::Index>(lattice.index(s, theta));
      out.data(row, row) += 6.0 * hop;
      for (int mu = 0; mu < 3; ++mu) {
        auto nb = c;
        nb[mu] += 1;
        const auto fwd = lattice.site(nb[0], nb[1], nb[2]);
        const auto col = static_cast<Eigen::Index>(lattice.index(fwd, theta));
        // f(x+mu) enters with e^{-i int_x^{x+mu} a}.
        const std::complex<double> link = std::polar(1.0, -phases[s][mu]);
        out.data(row, col) += -hop * link;
        out.data(col, row) += -hop * std::conj(link);
      }
    }
    if (lattice.with_spin && !b.is_zero()) {
      const Vec3 x = lattice.position(s);
      for (int theta : {1, -1}) {
        const auto row = static_cast<Eigen::Index>(lattice.index(s, theta));
        const auto col = static_cast<Eigen::Index>(lattice.index(s, -theta));
        out.data(row, row) += coupling.diagonal(x, theta);
        out.data(row, col) += coupling.offdiagonal(x, -theta);
      }
    }
  }
  return out;
}

inline OperatorMatrix build_h(const FieldConfig& fields, const Lattice& lattice) {
  return build_h(link_phases(fields.a, lattice), fields.b, lattice);
}

// ---------------------------------------------------------------------------
// Spectral calculus

inline OperatorMatrix sqrt_shift(const Spectrum& spec_h, double m, const Lattice& lattice) {
  detail::require(m >= 0.0, "sqrt_shift: m must be >= 0");
  const double lowest = 2.0 * spec_h.values.minCoeff() + m * m;
  if (lowest < -1e-10) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "sqrt_shift: 2h + m^2 has negative eigenvalue " << lowest
        << " (m = " << m << " too small)";
    throw NumericalError(msg.str());
  }
  OperatorMatrix out;
  out.tag = OperatorTag::H;
  out.lattice = lattice;
  out.data = spectral_function(spec_h, [m](double l) { return std::sqrt(std::max(0.0, 2.0 * l + m * m)) - m; });
  return out;
}

/// H = sqrt(2h + m^2) - m
inline OperatorMatrix sqrt_shift(const OperatorMatrix& h, double m) {
  return sqrt_shift(eigh(h.data), m, h.lattice);
}

/// H + V, with V sampled at the sites.
inline OperatorMatrix add_potential(const OperatorMatrix& op, const Potential& V) {
  OperatorMatrix out = op;
  out.tag = OperatorTag::H_plus_V;
  const auto& lat = op.lattice;
  const int n_spin = lat.with_spin ? 2 : 1;
  for (std::size_t s = 0; s < lat.sites(); ++s) {
    const double v = V(lat.position(s));
    for (int sp = 0; sp < n_spin; ++sp) {
      const auto i = static_cast<Eigen::Index>(lat.index(s, sp == 0 ? 1 : -1));
      out.data(i, i) += v;
    }
  }
  return out;
}

/// e^{-t A}
inline OperatorMatrix semigroup_matrix(const OperatorMatrix& a, double t) {
  detail::require(t >= 0.0, "semigroup_matrix: t must be >= 0");
  OperatorMatrix out;
  out.tag = a.tag;
  out.lattice = a.lattice;
  if (t == 0.0) {
    out.data = Eigen::MatrixXcd::Identity(a.data.rows(), a.data.cols());
    return out;
  }
  out.data = spectral_function(eigh(a.data), [t](double l) { return std::exp(-t * l); });
  return out;
}

// ---------------------------------------------------------------------------
// Bound states

struct BoundState {
  double energy = 0.0;
  Eigen::VectorXcd phi;  // unit l2 norm over lattice x Z_2
  double residual = 0.0;
  Lattice lattice;

  /// Continuum amplitude phi(site)/dx^{3/2}, so that the L^2 norm is 1.
  std::complex<double> site_value(std::size_t s, int theta) const {
    return phi[static_cast<Eigen::Index>(lattice.index(s, theta))] /
           std::pow(lattice.spacing(), 1.5);
  }

  /// Periodic trilinear interpolation of the continuum amplitude.
  std::complex<double> value(const Vec3& x, int theta) const {
    const double h = lattice.spacing();
    std::array<int, 3> base{};
    std::array<double, 3> frac{};
    for (int k = 0; k < 3; ++k) {
      const double u = (x[k] + 0.5 * lattice.length) / h;
      const double fl = std::floor(u);
      base[k] = static_cast<int>(fl);
      frac[k] = u - fl;
    }
    std::complex<double> acc = 0.0;
    for (int di = 0; di < 2; ++di) {
      for (int dj = 0; dj < 2; ++dj) {
        for (int dk = 0; dk < 2; ++dk) {
          const double w = (di ? frac[0] : 1 - frac[0]) * (dj ? frac[1] : 1 - frac[1]) *
                           (dk ? frac[2] : 1 - frac[2]);
          if (w == 0.0) continue;
          acc += w * site_value(lattice.site(base[0] + di, base[1] + dj, base[2] + dk), theta);
        }
      }
    }
    return acc;
  }

  /// max over spin of |phi(x, theta)| at a site.
  double site_modulus(std::size_t s) const {
    double v = std::abs(site_value(s, 1));
    if (lattice.with_spin) v = std::max(v, std::abs(site_value(s, -1)));
    return v;
  }
};

/// Lowest eigenpair, phase fixed so the largest-modulus component is
/// positive real.
inline BoundState ground_state(const OperatorMatrix& a) {
  const Spectrum s = eigh_lowest(a.data, 1);
  BoundState out;
  out.lattice = a.lattice;
  out.energy = s.values[0];
  out.phi = s.vectors.col(0);
  Eigen::Index arg = 0;
  out.phi.cwiseAbs().maxCoeff(&arg);
  out.phi *= std::abs(out.phi[arg]) / out.phi[arg];
  out.phi.normalize();
  out.residual = (a.data * out.phi - out.energy * out.phi).norm();
  if (!(out.residual <= 1e-8)) {
    std::ostringstream msg;
    msg << "ground_state: residual " << out.residual << " exceeds 1e-8";
    throw NumericalError(msg.str());
  }
  return out;
}

/// Spectrum and operator for the usual pipeline h -> H -> H + V.
struct OracleRun {
  Spectrum spectrum_h;
  OperatorMatrix H_plus_V;
  BoundState ground;
};

inline OracleRun run_oracle(const FieldConfig& fields, const Lattice& lattice, double m) {
  OracleRun out;
  const auto h = build_h(fields, lattice);
  out.spectrum_h = eigh(h.data);
  out.H_plus_V = add_potential(sqrt_shift(out.spectrum_h, m, lattice), fields.V);
  out.ground = ground_state(out.H_plus_V);
  return out;
}

// ---------------------------------------------------------------------------
// CSV export

inline void write_spectrum_csv(std::ostream& os, const Eigen::VectorXd& values) {
  os << "index,eigenvalue\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < values.size(); ++i) os << i << ',' << values[i] << '\n';
}

inline void write_state_csv(std::ostream& os, const BoundState& state) {
  os << "x,y,z,theta,re,im\n" << std::setprecision(17);
  const auto& lat = state.lattice;
  const int n_spin = lat.with_spin ? 2 : 1;
  for (int sp = 0; sp < n_spin; ++sp) {
    const int theta = sp == 0 ? 1 : -1;
    for (std::size_t s = 0; s < lat.sites(); ++s) {
      const Vec3 x = lat.position(s);
      const auto v = state.site_value(s, theta);
      os << x[0] << ',' << x[1] << ',' << x[2] << ',' << theta << ',' << v.real() << ','
         << v.imag() << '\n';
    }
  }
}

}  // namespace fkspin

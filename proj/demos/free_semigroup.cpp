// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

// (e^{-tH} g)(x) for a Gaussian g, spinless and with a constant field in
// spin mode, at a few worker counts.

#include <cstdio>

#include "fkspin/mc_engine.hpp"

int main() {
  using namespace fkspin;
  ExperimentSpec spec;
  spec.t = 1.0;
  spec.mass = 2.0;
  spec.n_samples = 200000;
  spec.seed = 7;
  const auto g = TestFunction::gaussian(Vec3{}, 1.0);
  const Vec3 x{0.5, 0.0, 0.0};

  for (unsigned workers : {1u, 4u}) {
    spec.workers = workers;
    const auto e = apply_semigroup(x, 0, g, spec);
    std::printf("spinless  workers=%u  %.12f +- %.2e\n", workers, e.mean.real(), e.std_error);
  }

  spec.workers = 1;
  spec.mode = Mode::spin;
  spec.fields.b = MagneticField{ConstantB{{0.3, 0.0, 0.5}}};
  for (int alpha : {0, 1}) {
    const auto e = apply_semigroup(x, alpha, g, spec);
    std::printf("spin      alpha=%d    %.12f %+.12fi +- %.2e  zero-hit %.4f  guarantee %s\n", alpha,
                e.mean.real(), e.mean.imag(), e.std_error, e.zero_hit_fraction,
                e.finite_variance_guarantee ? "yes" : "no");
  }
  return 0;
}

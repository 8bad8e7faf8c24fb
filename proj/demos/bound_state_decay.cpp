// Copyright 2026 The fkspin Authors.
// SPDX-License-Identifier: Apache-2.0

// Ground state of H + V for a finite well on the lattice, its fitted tail
// rate, and a short martingale scan from the continuum side. At n = 14 the
// scan drifts visibly; the gap shrinks as n grows.

#include <cstdio>
#include <iostream>

#include "fkspin/decay_lab.hpp"

int main() {
  using namespace fkspin;
  FieldConfig f;
  f.V = Potential{FiniteWellV{1.5, 1.5}};
  const Lattice lattice{14, 10.0, false};
  const auto run = run_oracle(f, lattice, 1.0);
  std::printf("E = %.10f  residual %.1e\n", run.ground.energy, run.ground.residual);

  const auto rb = rate_bounds(run.ground.energy, 1.0, 0.0);
  std::printf("m_eps = %.6f  condition %s\n", rb.m_epsilon,
              rb.condition_n34.value_or(false) ? "holds" : "fails");

  const double dx = lattice.spacing();
  const FitWindow window{1.5 + dx, 0.5 * lattice.length - 2.0 * dx};
  try {
    const auto fit = fit_decay(run.ground, window);
    std::printf("a_hat = %.4f  b_hat = %.4f  r^2 = %.4f  (%d shells)\n", fit.a_hat, fit.b_hat, fit.r_squared,
                fit.shells);
  } catch (const InvalidArgument& e) {
    std::printf("fit skipped: %s\n", e.what());
  }

  ExperimentSpec spec;
  spec.fields = f;
  spec.n_samples = 50000;
  const auto scan = martingale_scan(spec, run.ground, Vec3{2.0, 0.0, 0.0}, 0, {0.0, 0.5, 1.0});
  write_scan_csv(std::cout, scan);
  return 0;
}

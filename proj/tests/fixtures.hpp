// Shared test fixtures.  The expected numbers quoted in the tests were
// worked out by hand from the no-assumption interval formula
//   P(Y=1,X=x|Z=z)  <=  P(Y(x)=1|Z=z)  <=  P(Y=1,X=x|Z=z) + P(X!=x|Z=z)
// before any solver code existed, and are frozen here.
#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "ivsensa/distribution.hpp"

namespace fixtures {

using density_fn = std::function<double(double)>;

// Per-instrument intervals: arm 1 -> [0.2,0.8] x [0.5,0.9],
//                           arm 0 -> [0.3,0.7] x [0.1,0.7].
// Exclusion (theta=0) arm-1 bounds: [0.5,0.8]; full box (theta=1): [0.35,0.85].
// ATE: theta=0 -> [-0.2,0.5], theta=1 -> [-0.35,0.65].
inline ivsensa::JointDiscreteDist d1() {
  return ivsensa::binary_dist(0.5, 0.4, 0.6, 0.2, 0.3, 0.5, 0.1);
}

// Arm-1 intervals [0.05,0.75] and [0.8,0.9] are disjoint, so exclusion is
// refuted; the gap closes once the cdf distance may reach 0.05.
inline ivsensa::JointDiscreteDist d2() {
  return ivsensa::binary_dist(0.5, 0.3, 0.9, 0.05, 0.3, 0.8, 0.05);
}

// Strictly positive effect under exclusion ([0.1, 0.6]) that washes out by
// theta=1 ([-0.26, 0.74]); used for breakdown searches.
inline ivsensa::JointDiscreteDist d3() {
  return ivsensa::binary_dist(0.5, 0.5, 0.8, 0.2, 0.1, 0.7, 0.02);
}

// Valid random binary distribution with margins kept off the boundary.
inline ivsensa::JointDiscreteDist random_binary(std::mt19937& rng) {
  std::uniform_real_distribution<double> mid(0.1, 0.9);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  const double pz1 = mid(rng);
  const double pi0 = mid(rng), pi1 = mid(rng);
  return ivsensa::binary_dist(pz1, pi0, pi1,
                              frac(rng) * pi0, frac(rng) * (1.0 - pi0),
                              frac(rng) * pi1, frac(rng) * (1.0 - pi1));
}

// Density table built from analytic curves sampled at the sieve grid, with
// each row rescaled to exact unit Riemann mass like the estimator does.
// Strata are ordered (x=0|z=0), (x=0|z=1), (x=1|z=0), (x=1|z=1).
inline ivsensa::CondDensityTable sieve_table(int degree, const density_fn& f00,
                                             const density_fn& f01, const density_fn& f10,
                                             const density_fn& f11, double pi1_z0,
                                             double pi1_z1, double pz1) {
  auto row = [&](const density_fn& f) {
    ivsensa::Vec r(static_cast<std::size_t>(degree + 1));
    double mass = 0.0;
    for (int m = 0; m <= degree; ++m) {
      r[static_cast<std::size_t>(m)] = f(static_cast<double>(m) / degree);
      mass += r[static_cast<std::size_t>(m)];
    }
    mass /= degree + 1;
    for (double& v : r) v /= mass;
    return r;
  };
  ivsensa::CondDensityTable t;
  t.degree = degree;
  t.pz = {1.0 - pz1, pz1};
  t.propensity = {{1.0 - pi1_z0, pi1_z0}, {1.0 - pi1_z1, pi1_z1}};
  t.density_grid = {{row(f00), row(f01)}, {row(f10), row(f11)}};
  return t;
}

// Fully independent data: triangular treated outcome (f = 2y), uniform
// untreated one, identical across instrument values.  Truth: ATE = 1/6,
// F_1(a) = a^2, F_0(a) = a, QTE(tau) = sqrt(tau) - tau.
inline ivsensa::CondDensityTable independent_table(int degree, double pi1_z0 = 0.4,
                                                   double pi1_z1 = 0.7, double pz1 = 0.5) {
  auto treated = [](double y) { return 2.0 * y; };
  auto control = [](double) { return 1.0; };
  return sieve_table(degree, control, control, treated, treated, pi1_z0, pi1_z1, pz1);
}

// Mild instrument dependence in both arms; nowhere near refuted, so the
// exclusion point theta = 0 stays feasible.
inline ivsensa::CondDensityTable drifting_table(int degree) {
  return sieve_table(
      degree, [](double y) { return 1.3 - 0.3 * y; }, [](double y) { return 0.85 + 0.3 * y; },
      [](double y) { return 0.7 + 0.6 * y; }, [](double y) { return 1.15 - 0.3 * y; },
      0.5, 0.6, 0.4);
}

// Observed outcome mass concentrated near opposite ends of [0,1] across the
// two instrument values, with propensity 0.6 in both strata: the best
// lower envelope of the treated arm integrates to about 1.2.
inline ivsensa::CondDensityTable conflicting_table(int degree) {
  const double d = degree;
  auto low_end = [d](double y) { return std::pow(1.0 - y, d); };
  auto high_end = [d](double y) { return std::pow(y, d); };
  auto flat = [](double) { return 1.0; };
  return sieve_table(degree, flat, flat, low_end, high_end, 0.6, 0.6, 0.5);
}

}  // namespace fixtures

// Bounds for continuous outcomes.  Candidate potential-outcome densities
// live in a Bernstein sieve: rows of simplex weight matrices against the
// scaled basis.  The observational link, the simplex geometry, and the
// instrument relaxation evaluated on a grid make a finite linear program.
#pragma once

#include <functional>
#include <vector>

#include "ivsensa/distribution.hpp"
#include "ivsensa/lp.hpp"
#include "ivsensa/sensitivity.hpp"
#include "ivsensa/types.hpp"

namespace ivsensa {

struct SieveConfig {
  int degree = 30;           // basis degree M
  int constraint_grid = 128; // relaxation rows at y = n/(N+1), n = 1..N
  int quadrature = 512;      // objective Riemann nodes n/L, n = 0..L-1
};

// Scalar target: integral of omega_x(y) . f_{Y(x)|Z}(y) summed over arms.
// The named tags fill in the weight functions; `custom` uses the supplied
// ones, each mapping y in [0,1] to a vector over instrument values.
struct FunctionalSpec {
  enum class Tag { ate, cdf_at, custom };
  Tag tag = Tag::ate;
  double at = 1.0;  // cdf_at cut, unit scale
  int arm = 1;      // cdf_at arm
  std::function<Vec(double)> omega0;
  std::function<Vec(double)> omega1;
};

FunctionalSpec ate_functional();
FunctionalSpec cdf_functional(int arm, double at);

// Full program over the four weight matrices, ordered [W_1, W_{1,0}, W_0,
// W_{0,1}] with variable index (block * s_Z + j) * (M+1) + m.
LinearProgram build_sieve_lp(const CondDensityTable& table, const ModelKind& kind,
                             const SieveConfig& cfg, const FunctionalSpec& spec,
                             Sense sense);

IdentifiedInterval functional_bounds(const CondDensityTable& table,
                                     const ModelKind& kind, const SieveConfig& cfg,
                                     const FunctionalSpec& spec);

// Evenly spaced points 0, 1/(points-1), ..., 1.
Vec unit_grid(int points);

// Bounds on P(Y(arm) <= a) over a_grid, forced monotone in a afterwards:
// lower bounds by running max, upper bounds by running min from the right.
// max_violation records the largest adjustment that took.
struct CdfBand {
  Vec grid;
  std::vector<IdentifiedInterval> band;
  double max_violation = 0.0;
  bool feasible = true;
};

CdfBand cdf_bounds(const CondDensityTable& table, const ModelKind& kind,
                   const SieveConfig& cfg, int arm, const Vec& a_grid);

// Quantile treatment effect bounds at level tau, from inverting the two
// monotone cdf bands on a_grid and mapping back to raw outcome units.  A
// side that never crosses tau on the grid caps at the top point and is
// flagged open.
struct QteResult {
  IdentifiedInterval interval;
  bool lower_open = false;
  bool upper_open = false;
};

QteResult qte_bounds(const CondDensityTable& table, const ModelKind& kind,
                     const SieveConfig& cfg, double tau, const Vec& a_grid);

// Data-only overidentification check: integrates the pointwise best lower
// envelope max_z pi(x|z) * (interpolated density) per arm.  A value above
// one is impossible under full instrument independence.
struct RefutationResult {
  bool refuted = false;
  Vec integrals;  // one per arm
};

RefutationResult refutation_check(const CondDensityTable& table, int quadrature = 512);

FalsificationResult falsification_point_continuous(const CondDensityTable& table,
                                                   ModelTag tag, const SieveConfig& cfg,
                                                   double tol = 1e-6);

BreakdownResult breakdown_point_continuous(const CondDensityTable& table, ModelTag tag,
                                           const SieveConfig& cfg,
                                           const FunctionalSpec& spec, double value,
                                           double tol = 1e-6);

SensitivityCurve sensitivity_curve_continuous(const CondDensityTable& table,
                                              ModelTag tag, const Vec& thetas,
                                              const SieveConfig& cfg,
                                              const FunctionalSpec& spec);

}  // namespace ivsensa

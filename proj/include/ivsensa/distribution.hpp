// Estimated joint distributions: the discrete table used by the exact
// bound programs and the conditional-density table feeding the sieve.
#pragma once

#include <string>
#include <vector>

#include "ivsensa/data.hpp"
#include "ivsensa/lp.hpp"

namespace ivsensa {

// Discrete outcome law of (Y, X | Z) together with the instrument margin.
// Index conventions: z and x index the sorted label lists, iy indexes the
// per-arm outcome support.
struct JointDiscreteDist {
  std::vector<std::vector<double>> y_support;  // per arm x
  std::vector<std::string> x_support;
  std::vector<std::string> z_support;
  Vec pz;                                      // P(Z = z)
  Mat propensity;                              // propensity[z][x] = P(X=x | Z=z)
  std::vector<std::vector<Vec>> cells;         // cells[z][x][iy] = P(Y=y, X=x | Z=z)
  Vec mean_y_given_x;                          // E[Y | X=x]

  int n_z() const { return static_cast<int>(z_support.size()); }
  int n_x() const { return static_cast<int>(x_support.size()); }
  int n_y(int x) const { return static_cast<int>(y_support[static_cast<std::size_t>(x)].size()); }

  double pi(int x, int z) const {
    return propensity[static_cast<std::size_t>(z)][static_cast<std::size_t>(x)];
  }
  double cell(int z, int x, int iy) const {
    return cells[static_cast<std::size_t>(z)][static_cast<std::size_t>(x)][static_cast<std::size_t>(iy)];
  }
  double prob_x(int x) const;  // P(X = x)

  // Two arms, two instrument values, outcome support {0,1} for both arms.
  bool is_binary() const;

  // Recomputes E[Y|X=x] from the table; used by hand-built fixtures.
  void fill_means_from_cells();

  // Checks the probability axioms at tolerance 1e-9 and that no propensity
  // or instrument cell is degenerate.  Throws std::invalid_argument.
  void validate() const;
};

// Binary shorthand: pz1 = P(Z=1), pi1_z* = P(X=1|Z=*), p11_z*/p10_z* =
// P(Y=1, X=1|Z=*) and P(Y=1, X=0|Z=*).  Remaining cells are implied.
JointDiscreteDist binary_dist(double pz1, double pi1_z0, double pi1_z1,
                              double p11_z0, double p10_z0,
                              double p11_z1, double p10_z1);

// Frequency estimate with optional row weights.  Outcome supports are the
// sorted distinct values observed per arm; labels sort lexicographically.
JointDiscreteDist estimate_discrete(const Dataset& data);

// Conditional outcome densities on [0,1] tabulated at the Bernstein grid
// m/M, m = 0..M.  density_grid[x] has one row per instrument value.
struct CondDensityTable {
  int degree = 0;  // M
  std::vector<Mat> density_grid;
  Mat propensity;  // propensity[z][x]
  Vec pz;
  AffineMap affine;  // raw outcome = shift + scale * unit outcome

  int n_z() const { return static_cast<int>(pz.size()); }
  double pi(int x, int z) const {
    return propensity[static_cast<std::size_t>(z)][static_cast<std::size_t>(x)];
  }

  // Nonnegative finite grid values with Riemann mass sum/(M+1) in [0.9, 1.1],
  // valid margins.  Throws std::invalid_argument.
  void validate() const;
};

struct DensityEstimOptions {
  int min_stratum = 30;  // fewest observations tolerated per (x,z) cell
};

// Gaussian kernel estimate per (x,z) stratum with Silverman bandwidth and
// reflection at both edges, then renormalized to unit Riemann mass.
// Outcomes must already lie in [0,1].
CondDensityTable estimate_cond_density(const Dataset& data, int degree,
                                       const DensityEstimOptions& opts = {});

}  // namespace ivsensa

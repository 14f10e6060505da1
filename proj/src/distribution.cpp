#include "ivsensa/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace ivsensa {

namespace {

constexpr double kTol = 1e-9;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

double JointDiscreteDist::prob_x(int x) const {
  double s = 0.0;
  for (int z = 0; z < n_z(); ++z) s += pz[static_cast<std::size_t>(z)] * pi(x, z);
  return s;
}

bool JointDiscreteDist::is_binary() const {
  if (n_x() != 2 || n_z() != 2) return false;
  for (const auto& sup : y_support)
    if (sup != Vec{0.0, 1.0}) return false;
  return true;
}

void JointDiscreteDist::fill_means_from_cells() {
  mean_y_given_x.assign(static_cast<std::size_t>(n_x()), 0.0);
  for (int x = 0; x < n_x(); ++x) {
    double num = 0.0;
    for (int z = 0; z < n_z(); ++z)
      for (int iy = 0; iy < n_y(x); ++iy)
        num += pz[static_cast<std::size_t>(z)] * cell(z, x, iy) *
               y_support[static_cast<std::size_t>(x)][static_cast<std::size_t>(iy)];
    const double px = prob_x(x);
    require(px > kTol, "cannot compute E[Y|X=" + x_support[static_cast<std::size_t>(x)] +
                           "]: P(X=x) is zero");
    mean_y_given_x[static_cast<std::size_t>(x)] = num / px;
  }
}

void JointDiscreteDist::validate() const {
  const int sz = n_z(), sx = n_x();
  require(sz >= 2, "need at least two instrument values");
  require(sx >= 2, "need at least two treatment arms");
  require(static_cast<int>(pz.size()) == sz, "pz size mismatch");
  require(static_cast<int>(y_support.size()) == sx, "y_support size mismatch");
  for (const auto& sup : y_support) {
    require(!sup.empty(), "empty outcome support");
    require(std::is_sorted(sup.begin(), sup.end()), "outcome support must be sorted");
  }

  double pz_sum = 0.0;
  for (double v : pz) {
    require(v > 0.0 && v < 1.0, "instrument cell probability not in (0,1)");
    pz_sum += v;
  }
  require(std::fabs(pz_sum - 1.0) <= kTol, "instrument probabilities do not sum to one");

  require(static_cast<int>(propensity.size()) == sz, "propensity row count mismatch");
  for (int z = 0; z < sz; ++z) {
    require(static_cast<int>(propensity[static_cast<std::size_t>(z)].size()) == sx,
            "propensity column count mismatch");
    double s = 0.0;
    for (int x = 0; x < sx; ++x) {
      const double v = pi(x, z);
      require(v > 0.0 && v < 1.0,
              "degenerate propensity P(X=" + x_support[static_cast<std::size_t>(x)] +
                  "|Z=" + z_support[static_cast<std::size_t>(z)] + ")");
      s += v;
    }
    require(std::fabs(s - 1.0) <= kTol, "propensity rows must sum to one");
  }

  require(static_cast<int>(cells.size()) == sz, "cells row count mismatch");
  for (int z = 0; z < sz; ++z) {
    require(static_cast<int>(cells[static_cast<std::size_t>(z)].size()) == sx,
            "cells arm count mismatch");
    double total = 0.0;
    for (int x = 0; x < sx; ++x) {
      require(static_cast<int>(cells[static_cast<std::size_t>(z)][static_cast<std::size_t>(x)].size()) ==
                  n_y(x),
              "cells outcome count mismatch");
      double arm = 0.0;
      for (int iy = 0; iy < n_y(x); ++iy) {
        const double v = cell(z, x, iy);
        require(v >= -kTol, "negative cell probability");
        arm += v;
      }
      require(std::fabs(arm - pi(x, z)) <= kTol,
              "cells do not aggregate to the propensity at z=" +
                  z_support[static_cast<std::size_t>(z)]);
      total += arm;
    }
    require(std::fabs(total - 1.0) <= kTol, "cells do not sum to one within a stratum");
  }
  require(static_cast<int>(mean_y_given_x.size()) == sx, "mean_y_given_x size mismatch");
}

JointDiscreteDist binary_dist(double pz1, double pi1_z0, double pi1_z1,
                              double p11_z0, double p10_z0,
                              double p11_z1, double p10_z1) {
  JointDiscreteDist d;
  d.y_support = {{0.0, 1.0}, {0.0, 1.0}};
  d.x_support = {"0", "1"};
  d.z_support = {"0", "1"};
  d.pz = {1.0 - pz1, pz1};
  d.propensity = {{1.0 - pi1_z0, pi1_z0}, {1.0 - pi1_z1, pi1_z1}};
  // cells[z][x] = {P(Y=0,X=x|Z=z), P(Y=1,X=x|Z=z)}
  d.cells = {{{1.0 - pi1_z0 - p10_z0, p10_z0}, {pi1_z0 - p11_z0, p11_z0}},
             {{1.0 - pi1_z1 - p10_z1, p10_z1}, {pi1_z1 - p11_z1, p11_z1}}};
  d.fill_means_from_cells();
  d.validate();
  return d;
}

JointDiscreteDist estimate_discrete(const Dataset& data) {
  require(!data.rows.empty(), "cannot estimate from an empty dataset");

  std::set<std::string> xs, zs;
  for (const auto& r : data.rows) {
    xs.insert(r.x);
    zs.insert(r.z);
  }
  JointDiscreteDist d;
  d.x_support.assign(xs.begin(), xs.end());
  d.z_support.assign(zs.begin(), zs.end());
  const int sx = d.n_x(), sz = d.n_z();
  require(sx >= 2, "treatment column has fewer than two distinct values");
  require(sz >= 2, "instrument column has fewer than two distinct values");

  auto x_index = [&](const std::string& s) {
    return static_cast<int>(std::lower_bound(d.x_support.begin(), d.x_support.end(), s) -
                            d.x_support.begin());
  };
  auto z_index = [&](const std::string& s) {
    return static_cast<int>(std::lower_bound(d.z_support.begin(), d.z_support.end(), s) -
                            d.z_support.begin());
  };

  // Sorted distinct outcomes per arm.
  std::vector<std::set<double>> ysets(static_cast<std::size_t>(sx));
  for (const auto& r : data.rows) ysets[static_cast<std::size_t>(x_index(r.x))].insert(r.y);
  d.y_support.resize(static_cast<std::size_t>(sx));
  for (int x = 0; x < sx; ++x)
    d.y_support[static_cast<std::size_t>(x)].assign(ysets[static_cast<std::size_t>(x)].begin(),
                                                    ysets[static_cast<std::size_t>(x)].end());
  auto y_index = [&](int x, double y) {
    const auto& sup = d.y_support[static_cast<std::size_t>(x)];
    return static_cast<int>(std::lower_bound(sup.begin(), sup.end(), y) - sup.begin());
  };

  Vec z_mass(static_cast<std::size_t>(sz), 0.0);
  d.cells.assign(static_cast<std::size_t>(sz), {});
  for (int z = 0; z < sz; ++z) {
    d.cells[static_cast<std::size_t>(z)].resize(static_cast<std::size_t>(sx));
    for (int x = 0; x < sx; ++x)
      d.cells[static_cast<std::size_t>(z)][static_cast<std::size_t>(x)].assign(
          static_cast<std::size_t>(d.n_y(x)), 0.0);
  }

  double total = 0.0;
  for (const auto& r : data.rows) {
    const int z = z_index(r.z), x = x_index(r.x);
    d.cells[static_cast<std::size_t>(z)][static_cast<std::size_t>(x)]
           [static_cast<std::size_t>(y_index(x, r.y))] += r.w;
    z_mass[static_cast<std::size_t>(z)] += r.w;
    total += r.w;
  }
  require(total > 0.0, "dataset has zero total weight");

  d.pz.resize(static_cast<std::size_t>(sz));
  d.propensity.assign(static_cast<std::size_t>(sz), Vec(static_cast<std::size_t>(sx), 0.0));
  for (int z = 0; z < sz; ++z) {
    const double zm = z_mass[static_cast<std::size_t>(z)];
    if (zm <= 0.0)
      throw std::runtime_error("estimation failed: instrument stratum z=" +
                               d.z_support[static_cast<std::size_t>(z)] + " is empty");
    d.pz[static_cast<std::size_t>(z)] = zm / total;
    for (int x = 0; x < sx; ++x) {
      auto& arm = d.cells[static_cast<std::size_t>(z)][static_cast<std::size_t>(x)];
      double arm_mass = 0.0;
      for (auto& v : arm) {
        v /= zm;
        arm_mass += v;
      }
      d.propensity[static_cast<std::size_t>(z)][static_cast<std::size_t>(x)] = arm_mass;
      if (arm_mass <= 0.0 || arm_mass >= 1.0)
        throw std::runtime_error("estimation failed: degenerate propensity P(X=" +
                                 d.x_support[static_cast<std::size_t>(x)] + "|Z=" +
                                 d.z_support[static_cast<std::size_t>(z)] + ") = " +
                                 std::to_string(arm_mass));
    }
  }

  // E[Y|X=x] straight from the rows.
  d.mean_y_given_x.assign(static_cast<std::size_t>(sx), 0.0);
  Vec x_mass(static_cast<std::size_t>(sx), 0.0);
  for (const auto& r : data.rows) {
    const int x = x_index(r.x);
    d.mean_y_given_x[static_cast<std::size_t>(x)] += r.w * r.y;
    x_mass[static_cast<std::size_t>(x)] += r.w;
  }
  for (int x = 0; x < sx; ++x)
    d.mean_y_given_x[static_cast<std::size_t>(x)] /= x_mass[static_cast<std::size_t>(x)];

  d.validate();
  return d;
}

void CondDensityTable::validate() const {
  const int sz = n_z();
  require(sz == 2, "conditional density table needs a binary instrument");
  require(degree >= 1, "density grid degree must be at least 1");
  require(static_cast<int>(density_grid.size()) == 2, "need exactly two treatment arms");
  for (const auto& arm : density_grid) {
    require(static_cast<int>(arm.size()) == sz, "density grid row count mismatch");
    for (const auto& row : arm) {
      require(static_cast<int>(row.size()) == degree + 1, "density grid column count mismatch");
      double mass = 0.0;
      for (double v : row) {
        require(std::isfinite(v) && v >= 0.0, "density grid values must be nonnegative");
        mass += v;
      }
      mass /= degree + 1;
      require(mass >= 0.9 && mass <= 1.1,
              "density row mass " + std::to_string(mass) + " is far from one");
    }
  }
  double pz_sum = 0.0;
  for (double v : pz) {
    require(v > 0.0 && v < 1.0, "instrument cell probability not in (0,1)");
    pz_sum += v;
  }
  require(std::fabs(pz_sum - 1.0) <= kTol, "instrument probabilities do not sum to one");
  require(static_cast<int>(propensity.size()) == sz, "propensity row count mismatch");
  for (int z = 0; z < sz; ++z) {
    require(static_cast<int>(propensity[static_cast<std::size_t>(z)].size()) == 2,
            "propensity column count mismatch");
    double s = 0.0;
    for (int x = 0; x < 2; ++x) {
      const double v = pi(x, z);
      require(v > 0.0 && v < 1.0, "degenerate propensity in density table");
      s += v;
    }
    require(std::fabs(s - 1.0) <= kTol, "propensity rows must sum to one");
  }
  require(std::isfinite(affine.shift) && std::isfinite(affine.scale) && affine.scale > 0.0,
          "invalid affine outcome map");
}

CondDensityTable estimate_cond_density(const Dataset& data, int degree,
                                       const DensityEstimOptions& opts) {
  require(degree >= 1, "density grid degree must be at least 1");
  require(!data.rows.empty(), "cannot estimate from an empty dataset");
  for (const auto& r : data.rows)
    require(r.y >= 0.0 && r.y <= 1.0, "outcomes must be rescaled to [0,1] first");

  std::set<std::string> xs, zs;
  for (const auto& r : data.rows) {
    xs.insert(r.x);
    zs.insert(r.z);
  }
  require(xs.size() == 2, "treatment column must have exactly two distinct values");
  require(zs.size() == 2, "instrument column must have exactly two distinct values");
  std::vector<std::string> x_support(xs.begin(), xs.end());
  std::vector<std::string> z_support(zs.begin(), zs.end());

  CondDensityTable t;
  t.degree = degree;
  t.density_grid.assign(2, Mat(2, Vec(static_cast<std::size_t>(degree + 1), 0.0)));
  t.propensity.assign(2, Vec(2, 0.0));
  t.pz.assign(2, 0.0);

  double total = 0.0;
  Vec z_mass(2, 0.0);
  std::vector<std::vector<std::vector<std::pair<double, double>>>> strata(
      2, std::vector<std::vector<std::pair<double, double>>>(2));
  for (const auto& r : data.rows) {
    const int x = (r.x == x_support[1]) ? 1 : 0;
    const int z = (r.z == z_support[1]) ? 1 : 0;
    strata[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)].emplace_back(r.y, r.w);
    z_mass[static_cast<std::size_t>(z)] += r.w;
    total += r.w;
  }
  require(total > 0.0, "dataset has zero total weight");
  for (int z = 0; z < 2; ++z) {
    t.pz[static_cast<std::size_t>(z)] = z_mass[static_cast<std::size_t>(z)] / total;
    for (int x = 0; x < 2; ++x) {
      double m = 0.0;
      for (const auto& [y, w] : strata[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)])
        m += w;
      t.propensity[static_cast<std::size_t>(z)][static_cast<std::size_t>(x)] =
          m / z_mass[static_cast<std::size_t>(z)];
    }
  }

  for (int x = 0; x < 2; ++x) {
    for (int z = 0; z < 2; ++z) {
      const auto& pts = strata[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)];
      const std::string where = "(x=" + x_support[static_cast<std::size_t>(x)] +
                                ", z=" + z_support[static_cast<std::size_t>(z)] + ")";
      if (static_cast<int>(pts.size()) < opts.min_stratum)
        throw std::runtime_error("density estimation failed: stratum " + where + " has " +
                                 std::to_string(pts.size()) + " rows, need " +
                                 std::to_string(opts.min_stratum));

      double wsum = 0.0, wsq = 0.0, mean = 0.0;
      for (const auto& [y, w] : pts) {
        wsum += w;
        wsq += w * w;
        mean += w * y;
      }
      mean /= wsum;
      double var = 0.0;
      for (const auto& [y, w] : pts) var += w * (y - mean) * (y - mean);
      var /= wsum;
      const double sd = std::sqrt(var);

      // Weighted interquartile range, same cdf convention as the quantile op.
      auto sorted = pts;
      std::sort(sorted.begin(), sorted.end());
      auto wq = [&](double q) {
        double acc = 0.0;
        for (const auto& [y, w] : sorted) {
          acc += w;
          if (acc >= q * wsum - 1e-12 * wsum) return y;
        }
        return sorted.back().first;
      };
      const double iqr = wq(0.75) - wq(0.25);
      const double neff = wsum * wsum / wsq;
      double spread = (iqr > 0.0) ? std::min(sd, iqr / 1.34) : sd;
      const double h = 0.9 * spread * std::pow(neff, -0.2);
      if (!(h > 0.0) || !std::isfinite(h))
        throw std::runtime_error("density estimation failed: stratum " + where +
                                 " is (nearly) a point mass, bandwidth came out zero");

      auto& row = t.density_grid[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)];
      const double norm = 1.0 / (std::sqrt(2.0 * M_PI) * h * wsum);
      for (int m = 0; m <= degree; ++m) {
        const double u = static_cast<double>(m) / degree;
        double f = 0.0;
        for (const auto& [y, w] : pts) {
          // Reflect at 0 and 1 so boundary mass is not lost.
          const double d0 = (u - y) / h;
          const double d1 = (u + y) / h;
          const double d2 = (u - (2.0 - y)) / h;
          f += w * (std::exp(-0.5 * d0 * d0) + std::exp(-0.5 * d1 * d1) +
                    std::exp(-0.5 * d2 * d2));
        }
        row[static_cast<std::size_t>(m)] = f * norm;
      }
      double mass = 0.0;
      for (double v : row) mass += v;
      mass /= degree + 1;
      if (mass <= 0.0)
        throw std::runtime_error("density estimation failed: zero mass in stratum " + where);
      for (double& v : row) v /= mass;  // exact unit Riemann mass
    }
  }

  t.validate();
  return t;
}

}  // namespace ivsensa

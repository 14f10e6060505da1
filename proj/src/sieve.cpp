#include "ivsensa/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "ivsensa/bernstein.hpp"
#include "ivsensa/bisect.hpp"
#include "ivsensa/parallel.hpp"

namespace ivsensa {

namespace {

void check_setup(const CondDensityTable& table, const SieveConfig& cfg) {
  if (cfg.degree < 1) throw std::invalid_argument("sieve degree must be at least 1");
  if (cfg.constraint_grid < 1)
    throw std::invalid_argument("constraint grid must have at least one point");
  if (cfg.quadrature < 2)
    throw std::invalid_argument("quadrature must use at least two nodes");
  table.validate();
  if (table.degree != cfg.degree)
    throw std::invalid_argument("density table degree does not match the sieve degree");
}

// Variable layout.  Every arm listed contributes two s_Z x (M+1) blocks:
// its marginal weight matrix, then the missing-arm one.  For the full
// program arms = {1, 0}, so blocks run [W_1, W_{1,0}, W_0, W_{0,1}].
struct Layout {
  std::vector<int> arms;
  int s_z = 0;
  int cols = 0;  // M + 1

  int nvars() const { return static_cast<int>(arms.size()) * 2 * s_z * cols; }
  int w(int pos, int j, int m) const { return ((2 * pos) * s_z + j) * cols + m; }
  int q(int pos, int j, int m) const { return ((2 * pos + 1) * s_z + j) * cols + m; }
};

// Constraint skeleton shared by every functional: the observational link
// ties each marginal row to the data plus the missing-arm slack, simplex
// rows pin unit mass, and the relaxation rows sample the model at the
// interior grid.  The objective is left at zero.
LinearProgram assemble(const CondDensityTable& table, const ModelKind& kind,
                       const SieveConfig& cfg, const Layout& lay) {
  const int nv = lay.nvars();
  LinearProgram p;
  p.objective.assign(static_cast<std::size_t>(nv), 0.0);
  p.var_lower.assign(static_cast<std::size_t>(nv), 0.0);
  p.var_upper.assign(static_cast<std::size_t>(nv),
                     std::numeric_limits<double>::infinity());

  for (std::size_t pos = 0; pos < lay.arms.size(); ++pos) {
    const int x = lay.arms[pos];
    const Mat& grid = table.density_grid[static_cast<std::size_t>(x)];
    for (int j = 0; j < lay.s_z; ++j) {
      const double keep = table.pi(x, j);
      const double miss = table.pi(1 - x, j);
      for (int m = 0; m < lay.cols; ++m) {
        Vec row(static_cast<std::size_t>(nv), 0.0);
        row[static_cast<std::size_t>(lay.w(static_cast<int>(pos), j, m))] = 1.0;
        row[static_cast<std::size_t>(lay.q(static_cast<int>(pos), j, m))] = -miss;
        p.eq_lhs.push_back(std::move(row));
        // the grid holds density values; dividing by M+1 turns them into
        // coordinates against the scaled basis
        p.eq_rhs.push_back(keep * grid[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] /
                           lay.cols);
      }
    }
  }

  const int blocks = static_cast<int>(lay.arms.size()) * 2;
  for (int b = 0; b < blocks; ++b)
    for (int j = 0; j < lay.s_z; ++j) {
      Vec row(static_cast<std::size_t>(nv), 0.0);
      const int base = (b * lay.s_z + j) * lay.cols;
      for (int m = 0; m < lay.cols; ++m) row[static_cast<std::size_t>(base + m)] = 1.0;
      p.eq_lhs.push_back(std::move(row));
      p.eq_rhs.push_back(1.0);
    }

  const LinearConstraintSet model = build_density_constraints(kind, table.pz);
  for (std::size_t pos = 0; pos < lay.arms.size(); ++pos)
    for (int n = 1; n <= cfg.constraint_grid; ++n) {
      const Vec basis =
          bernstein_basis(cfg.degree, static_cast<double>(n) / (cfg.constraint_grid + 1));
      for (std::size_t r = 0; r < model.lhs.size(); ++r) {
        Vec row(static_cast<std::size_t>(nv), 0.0);
        for (int j = 0; j < lay.s_z; ++j) {
          const double c = model.lhs[r][static_cast<std::size_t>(j)];
          if (c == 0.0) continue;
          for (int m = 0; m < lay.cols; ++m)
            row[static_cast<std::size_t>(lay.w(static_cast<int>(pos), j, m))] =
                c * basis[static_cast<std::size_t>(m)];
        }
        p.ineq_lhs.push_back(std::move(row));
        p.ineq_rhs.push_back(model.rhs[r]);
      }
    }
  return p;
}

// Weight vector of the functional for one arm at one outcome point.
Vec functional_weights(const FunctionalSpec& spec, const Vec& pz, int arm, double y) {
  const std::size_t s_z = pz.size();
  Vec w(s_z, 0.0);
  switch (spec.tag) {
    case FunctionalSpec::Tag::ate: {
      const double sign = arm == 1 ? 1.0 : -1.0;
      for (std::size_t j = 0; j < s_z; ++j) w[j] = sign * y * pz[j];
      break;
    }
    case FunctionalSpec::Tag::cdf_at: {
      if (arm == spec.arm && y <= spec.at)
        for (std::size_t j = 0; j < s_z; ++j) w[j] = pz[j];
      break;
    }
    case FunctionalSpec::Tag::custom: {
      const auto& fn = arm == 1 ? spec.omega1 : spec.omega0;
      if (!fn) throw std::invalid_argument("custom functional needs both weight functions");
      w = fn(y);
      if (w.size() != s_z)
        throw std::invalid_argument("custom weight function has the wrong width");
      break;
    }
  }
  return w;
}

// Left-endpoint Riemann objective over the quadrature nodes n/L.
void add_quadrature_objective(LinearProgram& p, const CondDensityTable& table,
                              const SieveConfig& cfg, const FunctionalSpec& spec,
                              const Layout& lay) {
  const int L = cfg.quadrature;
  for (int n = 0; n < L; ++n) {
    const double y = static_cast<double>(n) / L;
    const Vec basis = bernstein_basis(cfg.degree, y);
    for (std::size_t pos = 0; pos < lay.arms.size(); ++pos) {
      const Vec w = functional_weights(spec, table.pz, lay.arms[pos], y);
      for (int j = 0; j < lay.s_z; ++j) {
        if (w[static_cast<std::size_t>(j)] == 0.0) continue;
        for (int m = 0; m < lay.cols; ++m)
          p.objective[static_cast<std::size_t>(lay.w(static_cast<int>(pos), j, m))] +=
              w[static_cast<std::size_t>(j)] * basis[static_cast<std::size_t>(m)] / L;
      }
    }
  }
}

void check_arm(int arm) {
  if (arm != 0 && arm != 1) throw std::invalid_argument("arm must be 0 or 1");
}

void check_grid(const Vec& a_grid) {
  if (a_grid.empty()) throw std::invalid_argument("evaluation grid is empty");
  for (std::size_t i = 0; i < a_grid.size(); ++i) {
    if (!(a_grid[i] >= 0.0 && a_grid[i] <= 1.0))
      throw std::invalid_argument("evaluation grid must stay inside [0,1]");
    if (i > 0 && a_grid[i] <= a_grid[i - 1])
      throw std::invalid_argument("evaluation grid must increase");
  }
}

// parallel_for with exceptions carried back to the calling thread.
template <typename Fn>
void parallel_for_checked(int n, Fn&& fn) {
  std::mutex guard;
  std::exception_ptr first;
  parallel_for(n, [&](int i) {
    try {
      fn(i);
    } catch (...) {
      const std::lock_guard<std::mutex> lock(guard);
      if (!first) first = std::current_exception();
    }
  });
  if (first) std::rethrow_exception(first);
}

IdentifiedInterval solve_both_ways(LinearProgram& p) {
  p.sense = Sense::minimize;
  const LpSolution lo = solve_lp(p);
  if (lo.status == LpStatus::infeasible) return IdentifiedInterval::empty();
  p.sense = Sense::maximize;
  const LpSolution hi = solve_lp(p);
  if (lo.status != LpStatus::optimal || hi.status != LpStatus::optimal)
    throw std::runtime_error("sieve program did not reach an optimum");
  return IdentifiedInterval::of(lo.value, hi.value);
}

}  // namespace

FunctionalSpec ate_functional() { return {}; }

FunctionalSpec cdf_functional(int arm, double at) {
  check_arm(arm);
  if (!(at >= 0.0 && at <= 1.0))
    throw std::invalid_argument("cdf cut must lie in [0,1]");
  FunctionalSpec spec;
  spec.tag = FunctionalSpec::Tag::cdf_at;
  spec.arm = arm;
  spec.at = at;
  return spec;
}

LinearProgram build_sieve_lp(const CondDensityTable& table, const ModelKind& kind,
                             const SieveConfig& cfg, const FunctionalSpec& spec,
                             Sense sense) {
  check_setup(table, cfg);
  const Layout lay{{1, 0}, table.n_z(), cfg.degree + 1};
  LinearProgram p = assemble(table, kind, cfg, lay);
  add_quadrature_objective(p, table, cfg, spec, lay);
  p.sense = sense;
  return p;
}

IdentifiedInterval functional_bounds(const CondDensityTable& table,
                                     const ModelKind& kind, const SieveConfig& cfg,
                                     const FunctionalSpec& spec) {
  LinearProgram p = build_sieve_lp(table, kind, cfg, spec, Sense::minimize);
  return solve_both_ways(p);
}

Vec unit_grid(int points) {
  if (points < 2) throw std::invalid_argument("grid needs at least two points");
  Vec g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    g[static_cast<std::size_t>(i)] = static_cast<double>(i) / (points - 1);
  return g;
}

CdfBand cdf_bounds(const CondDensityTable& table, const ModelKind& kind,
                   const SieveConfig& cfg, int arm, const Vec& a_grid) {
  check_setup(table, cfg);
  check_arm(arm);
  check_grid(a_grid);

  CdfBand out;
  out.grid = a_grid;
  out.band.assign(a_grid.size(), IdentifiedInterval::empty());

  const Layout lay{{arm}, table.n_z(), cfg.degree + 1};
  const LinearProgram base = assemble(table, kind, cfg, lay);
  if (!check_feasible(base)) {
    out.feasible = false;
    return out;
  }

  // the feasible set does not move with a, only the objective does
  parallel_for_checked(static_cast<int>(a_grid.size()), [&](int i) {
    LinearProgram p = base;
    const Vec mass = bernstein_cdf(cfg.degree, a_grid[static_cast<std::size_t>(i)]);
    for (int j = 0; j < lay.s_z; ++j)
      for (int m = 0; m < lay.cols; ++m)
        p.objective[static_cast<std::size_t>(lay.w(0, j, m))] =
            table.pz[static_cast<std::size_t>(j)] * mass[static_cast<std::size_t>(m)];
    const IdentifiedInterval iv = solve_both_ways(p);
    if (!iv.feasible) throw std::runtime_error("cdf program lost feasibility");
    out.band[static_cast<std::size_t>(i)] = iv;
  });

  double slack = 0.0;
  double run = -std::numeric_limits<double>::infinity();
  for (auto& iv : out.band) {
    run = std::max(run, iv.lower);
    slack = std::max(slack, run - iv.lower);
    iv.lower = run;
  }
  run = std::numeric_limits<double>::infinity();
  for (auto it = out.band.rbegin(); it != out.band.rend(); ++it) {
    run = std::min(run, it->upper);
    slack = std::max(slack, it->upper - run);
    it->upper = run;
  }
  out.max_violation = slack;
  return out;
}

QteResult qte_bounds(const CondDensityTable& table, const ModelKind& kind,
                     const SieveConfig& cfg, double tau, const Vec& a_grid) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("quantile level must lie strictly inside (0,1)");
  const CdfBand treated = cdf_bounds(table, kind, cfg, 1, a_grid);
  const CdfBand control = cdf_bounds(table, kind, cfg, 0, a_grid);

  QteResult out;
  if (!treated.feasible || !control.feasible) return out;

  // first grid point where the chosen band edge reaches tau; a band that
  // never gets there caps at the last point and leaves the side open
  auto crossing = [&](const CdfBand& band, bool upper_edge, double& at) {
    for (std::size_t i = 0; i < band.grid.size(); ++i) {
      const double v = upper_edge ? band.band[i].upper : band.band[i].lower;
      if (v >= tau) {
        at = band.grid[i];
        return true;
      }
    }
    at = band.grid.back();
    return false;
  };

  double q1_low = 0.0, q1_high = 0.0, q0_low = 0.0, q0_high = 0.0;
  const bool hit1_low = crossing(treated, true, q1_low);
  const bool hit1_high = crossing(treated, false, q1_high);
  const bool hit0_low = crossing(control, true, q0_low);
  const bool hit0_high = crossing(control, false, q0_high);

  out.lower_open = !(hit1_low && hit0_high);
  out.upper_open = !(hit1_high && hit0_low);
  const double scale = table.affine.scale;
  out.interval = IdentifiedInterval::of(scale * (q1_low - q0_high),
                                        scale * (q1_high - q0_low));
  return out;
}

RefutationResult refutation_check(const CondDensityTable& table, int quadrature) {
  table.validate();
  if (quadrature < 2)
    throw std::invalid_argument("quadrature must use at least two nodes");

  RefutationResult out;
  out.integrals.assign(2, 0.0);
  for (int x = 0; x < 2; ++x) {
    const Mat& grid = table.density_grid[static_cast<std::size_t>(x)];
    double total = 0.0;
    for (int n = 0; n < quadrature; ++n) {
      const double y = static_cast<double>(n) / quadrature;
      double best = 0.0;
      for (int j = 0; j < table.n_z(); ++j)
        best = std::max(best, table.pi(x, j) *
                                  bernstein_approx(grid[static_cast<std::size_t>(j)], y));
      total += best;
    }
    out.integrals[static_cast<std::size_t>(x)] = total / quadrature;
    if (out.integrals[static_cast<std::size_t>(x)] > 1.0 + 1e-6) out.refuted = true;
  }
  return out;
}

FalsificationResult falsification_point_continuous(const CondDensityTable& table,
                                                   ModelTag tag, const SieveConfig& cfg,
                                                   double tol) {
  check_setup(table, cfg);
  FalsificationResult out;
  for (int arm = 0; arm < 2; ++arm) {
    const Layout lay{{arm}, table.n_z(), cfg.degree + 1};
    auto feasible_at = [&](double th) {
      return check_feasible(assemble(table, {tag, th}, cfg, lay));
    };
    double arm_theta = 0.0;
    if (!feasible_at(0.0)) {
      if (!feasible_at(1.0))
        throw std::runtime_error("constraint set empty even with theta = 1");
      arm_theta = bisect_threshold(feasible_at, 0.0, 1.0, tol);
    }
    out.per_arm.push_back(arm_theta);
    out.theta = std::max(out.theta, arm_theta);
  }
  return out;
}

BreakdownResult breakdown_point_continuous(const CondDensityTable& table, ModelTag tag,
                                           const SieveConfig& cfg,
                                           const FunctionalSpec& spec, double value,
                                           double tol) {
  const double start = falsification_point_continuous(table, tag, cfg, tol).theta;
  auto contained = [&](double th) {
    return functional_bounds(table, {tag, th}, cfg, spec).contains(value);
  };
  BreakdownResult out;
  if (contained(start)) {
    out.theta = start;
    return out;
  }
  if (!contained(1.0)) {
    out.never = true;
    return out;
  }
  out.theta = bisect_threshold(contained, start, 1.0, tol);
  return out;
}

SensitivityCurve sensitivity_curve_continuous(const CondDensityTable& table,
                                              ModelTag tag, const Vec& thetas,
                                              const SieveConfig& cfg,
                                              const FunctionalSpec& spec) {
  SensitivityCurve curve;
  curve.rows.resize(thetas.size());
  parallel_for_checked(static_cast<int>(thetas.size()), [&](int i) {
    const double th = thetas[static_cast<std::size_t>(i)];
    curve.rows[static_cast<std::size_t>(i)] = {
        th, functional_bounds(table, {tag, th}, cfg, spec)};
  });
  return curve;
}

}  // namespace ivsensa

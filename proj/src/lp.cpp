#include "ivsensa/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ivsensa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Flat row-major tableau.  Last column is the rhs, last row the reduced
// costs of the current phase.
struct Tableau {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Tableau(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  double* operator[](int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
  const double* operator[](int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }
};

struct Row {
  Vec coef;
  double rhs = 0.0;
  bool is_eq = false;
};

void validate(const LinearProgram& p) {
  const std::size_t n = p.objective.size();
  if (n == 0) throw std::invalid_argument("lp: empty objective");
  if (p.var_lower.size() != n || p.var_upper.size() != n)
    throw std::invalid_argument("lp: variable bound size does not match objective");
  if (p.ineq_lhs.size() != p.ineq_rhs.size())
    throw std::invalid_argument("lp: inequality lhs/rhs row count mismatch");
  if (p.eq_lhs.size() != p.eq_rhs.size())
    throw std::invalid_argument("lp: equality lhs/rhs row count mismatch");
  for (const auto& r : p.ineq_lhs)
    if (r.size() != n) throw std::invalid_argument("lp: inequality row has wrong width");
  for (const auto& r : p.eq_lhs)
    if (r.size() != n) throw std::invalid_argument("lp: equality row has wrong width");
  auto finite = [](double v) { return std::isfinite(v); };
  for (double v : p.objective)
    if (!finite(v)) throw std::invalid_argument("lp: non-finite objective entry");
  for (const auto& r : p.ineq_lhs)
    for (double v : r)
      if (!finite(v)) throw std::invalid_argument("lp: non-finite inequality entry");
  for (const auto& r : p.eq_lhs)
    for (double v : r)
      if (!finite(v)) throw std::invalid_argument("lp: non-finite equality entry");
  for (double v : p.ineq_rhs)
    if (!finite(v)) throw std::invalid_argument("lp: non-finite inequality rhs");
  for (double v : p.eq_rhs)
    if (!finite(v)) throw std::invalid_argument("lp: non-finite equality rhs");
  for (std::size_t j = 0; j < n; ++j) {
    if (!finite(p.var_lower[j]))
      throw std::invalid_argument("lp: lower bounds must be finite");
    if (std::isnan(p.var_upper[j]) || p.var_upper[j] == -kInf)
      throw std::invalid_argument("lp: invalid upper bound");
    if (p.var_lower[j] > p.var_upper[j])
      throw std::invalid_argument("lp: variable lower bound exceeds upper bound");
  }
}

bool all_zero(const Vec& r) {
  for (double v : r)
    if (v != 0.0) return false;
  return true;
}

// Shift variables to x = v - lower >= 0 and collect every constraint as a
// Row over x.  Returns false if a degenerate row is already contradictory.
bool gather_rows(const LinearProgram& p, const SolverOptions& opts, std::vector<Row>& out) {
  const std::size_t n = p.num_vars();
  auto shift_rhs = [&](const Vec& coef, double rhs) {
    double s = rhs;
    for (std::size_t j = 0; j < n; ++j) s -= coef[j] * p.var_lower[j];
    return s;
  };
  for (std::size_t i = 0; i < p.ineq_lhs.size(); ++i) {
    if (all_zero(p.ineq_lhs[i])) {
      if (p.ineq_rhs[i] < -opts.feas_tol) return false;
      continue;  // vacuous row
    }
    out.push_back({p.ineq_lhs[i], shift_rhs(p.ineq_lhs[i], p.ineq_rhs[i]), false});
  }
  for (std::size_t i = 0; i < p.eq_lhs.size(); ++i) {
    if (all_zero(p.eq_lhs[i])) {
      if (std::fabs(p.eq_rhs[i]) > opts.feas_tol) return false;
      continue;
    }
    out.push_back({p.eq_lhs[i], shift_rhs(p.eq_lhs[i], p.eq_rhs[i]), true});
  }
  // Finite upper bounds become ordinary rows x_j <= u_j - l_j.
  for (std::size_t j = 0; j < n; ++j) {
    if (p.var_upper[j] == kInf) continue;
    Vec coef(n, 0.0);
    coef[j] = 1.0;
    out.push_back({std::move(coef), p.var_upper[j] - p.var_lower[j], false});
  }
  return true;
}

struct Simplex {
  int n = 0;        // structural variables
  int ns = 0;       // slack/surplus columns
  int na = 0;       // artificial columns
  int m = 0;        // constraint rows
  Tableau t{1, 1};
  Tableau t0{1, 1};        // pristine copy, the anchor for rebuild()
  std::vector<int> basis;  // basic column per row
  Vec cur_cost;            // costs behind the current bottom row
  int pivots_since_rebuild = 0;
  bool rebuild_dead = false;
  const SolverOptions& opts;

  explicit Simplex(const std::vector<Row>& rows, int nvars, const SolverOptions& o)
      : n(nvars), m(static_cast<int>(rows.size())), t(1, 1), opts(o) {
    ns = 0;
    for (const auto& r : rows)
      if (!r.is_eq) ++ns;
    // Rows whose rhs is negative get flipped, which turns their slack into a
    // surplus; those rows and all equality rows need an artificial.
    na = 0;
    for (const auto& r : rows)
      if (r.is_eq || r.rhs < 0.0) ++na;
    const int cols = n + ns + na + 1;
    t = Tableau(m + 1, cols);
    basis.assign(m, -1);

    int slack_at = n;
    int art_at = n + ns;
    for (int i = 0; i < m; ++i) {
      const Row& r = rows[static_cast<std::size_t>(i)];
      const double sign = (r.rhs < 0.0) ? -1.0 : 1.0;
      double* ti = t[i];
      for (int j = 0; j < n; ++j) ti[j] = sign * r.coef[static_cast<std::size_t>(j)];
      t[i][t.cols - 1] = sign * r.rhs;
      if (!r.is_eq) {
        ti[slack_at] = sign;  // slack (+1) or surplus (-1)
        if (sign > 0.0) basis[static_cast<std::size_t>(i)] = slack_at;
        ++slack_at;
      }
      if (r.is_eq || sign < 0.0) {
        ti[art_at] = 1.0;
        basis[static_cast<std::size_t>(i)] = art_at;
        ++art_at;
      }
    }
    t0 = t;
  }

  bool is_artificial(int col) const { return col >= n + ns; }
  double rhs(int i) const { return t[i][t.cols - 1]; }

  void pivot(int pr, int pc) {
    double* prow = t[pr];
    const double pv = prow[pc];
    const int cols = t.cols;
    for (int j = 0; j < cols; ++j) prow[j] /= pv;
    prow[pc] = 1.0;
    for (int i = 0; i <= m; ++i) {
      if (i == pr) continue;
      double* ri = t[i];
      const double f = ri[pc];
      if (f == 0.0) continue;
      for (int j = 0; j < cols; ++j) ri[j] -= f * prow[j];
      ri[pc] = 0.0;
    }
    basis[static_cast<std::size_t>(pr)] = pc;
    ++pivots_since_rebuild;
  }

  // Reconstructs the tableau for the current basis from the pristine copy,
  // wiping the roundoff that piles up over long pivot runs.  Rows are
  // re-matched to basic columns greedily by largest pivot, which is a free
  // choice: only the column set matters.  Returns false and leaves the
  // tableau alone if the basis matrix has gone numerically singular.
  bool rebuild() {
    if (rebuild_dead) return false;
    const std::vector<int> cols_needed = basis;
    Tableau saved = t;
    const std::vector<int> saved_basis = basis;
    t = t0;
    std::vector<char> used(static_cast<std::size_t>(m), 0);
    for (int c : cols_needed) {
      int pr = -1;
      double best = 1e-11;
      for (int i = 0; i < m; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        const double a = std::fabs(t[i][c]);
        if (a > best) {
          best = a;
          pr = i;
        }
      }
      if (pr < 0) {
        t = std::move(saved);
        basis = saved_basis;
        rebuild_dead = true;
        return false;
      }
      pivot(pr, c);
      used[static_cast<std::size_t>(pr)] = 1;
    }
    if (!cur_cost.empty()) load_costs(cur_cost);
    pivots_since_rebuild = 0;
    return true;
  }

  // Primal steps under the current costs until the bottom row looks optimal
  // or an unbounded direction shows up.  Verdicts may rest on a drifted
  // tableau; iterate() re-checks them after a rebuild.
  bool run_steps(const std::vector<char>& banned, int& iter_budget, bool force_bland) {
    bool bland = force_bland;
    int stall = 0;
    double last_obj = t[m][t.cols - 1];
    while (true) {
      if (--iter_budget <= 0)
        throw std::runtime_error("lp: iteration limit exceeded");
      const double* cost = t[m];
      int pc = -1;
      if (!bland) {
        double best = -opts.feas_tol;
        for (int j = 0; j < n + ns + na; ++j) {
          if (banned[static_cast<std::size_t>(j)]) continue;
          if (cost[j] < best) { best = cost[j]; pc = j; }
        }
      } else {
        for (int j = 0; j < n + ns + na; ++j) {
          if (banned[static_cast<std::size_t>(j)]) continue;
          if (cost[j] < -opts.feas_tol) { pc = j; break; }
        }
      }
      if (pc < 0) return true;  // optimal

      // Harris-style two-pass ratio test.  The first pass relaxes every row
      // bound by a small slack, so a lone near-tolerance coefficient can
      // never dictate a catastrophic pivot; the second pass takes the row
      // with the largest pivot entry among those whose true ratio fits under
      // the relaxed bound.  Entries far below the column maximum never
      // pivot: overshooting their row costs at most a sliver of
      // infeasibility, which the dual cleanup pass repairs, while dividing
      // the tableau by them would wreck it outright.
      const double slack = 1e-7;
      double colmax = 0.0;
      for (int i = 0; i < m; ++i) colmax = std::max(colmax, t[i][pc]);
      const double a_floor = std::max(opts.pivot_tol, 1e-6 * colmax);
      double theta_max = kInf;
      for (int i = 0; i < m; ++i) {
        const double a = t[i][pc];
        if (a <= a_floor) continue;
        theta_max = std::min(theta_max, (std::max(rhs(i), 0.0) + slack) / a);
      }
      if (theta_max == kInf) return false;  // unbounded direction

      double amax = 0.0;
      for (int i = 0; i < m; ++i) {
        const double a = t[i][pc];
        if (a <= a_floor) continue;
        if (std::max(rhs(i), 0.0) / a <= theta_max) amax = std::max(amax, a);
      }
      int pr = -1;
      double best_a = 0.0;
      for (int i = 0; i < m; ++i) {
        const double a = t[i][pc];
        if (a <= a_floor) continue;
        if (std::max(rhs(i), 0.0) / a > theta_max) continue;
        if (bland) {
          // keep Bland's index order, but never far from the best magnitude
          if (a < 0.1 * amax) continue;
          if (pr < 0 || basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(pr)]) pr = i;
        } else if (pr < 0 || a > best_a) {
          pr = i;
          best_a = a;
        }
      }

      pivot(pr, pc);
      if (pivots_since_rebuild >= 128) rebuild();

      // Bottom-row rhs holds the negated objective, so progress raises it.
      const double obj = t[m][t.cols - 1];
      if (obj > last_obj + 1e-13) {
        stall = 0;
        last_obj = obj;
      } else if (++stall > 50) {
        bland = true;  // degenerate streak, switch to Bland's rule
      }
    }
  }

  // Minimizes the objective currently loaded in the cost row.  banned columns
  // never enter.  Returns false on unbounded.  Optimal and unbounded verdicts
  // are confirmed against a freshly rebuilt tableau, since reduced costs read
  // off a drifted one can close (or open) the search prematurely.
  bool iterate(const std::vector<char>& banned, int& iter_budget, bool force_bland) {
    for (int round = 0;; ++round) {
      const bool ok = run_steps(banned, iter_budget, force_bland);
      if (pivots_since_rebuild == 0) return ok;  // verdict from an exact tableau
      if (round >= 6 || !rebuild()) return ok;
      const double* cost = t[m];
      bool reopened = false;
      for (int j = 0; j < n + ns + na; ++j) {
        if (!banned[static_cast<std::size_t>(j)] && cost[j] < -opts.feas_tol) {
          reopened = true;
          break;
        }
      }
      if (!reopened) return true;  // optimal, confirmed exactly
    }
  }

  // Loads costs c (length n+ns+na) into the bottom row and prices out the
  // current basis so every basic column has zero reduced cost.  The vector
  // is kept so rebuild() can re-price after reconstructing the rows.
  void load_costs(const Vec& c) {
    if (&c != &cur_cost) cur_cost = c;
    double* bottom = t[m];
    for (int j = 0; j < n + ns + na; ++j) bottom[j] = c[static_cast<std::size_t>(j)];
    bottom[t.cols - 1] = 0.0;
    for (int i = 0; i < m; ++i) {
      const double cb = c[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])];
      if (cb == 0.0) continue;
      const double* ri = t[i];
      for (int j = 0; j < t.cols; ++j) bottom[j] -= cb * ri[j];
    }
    // Bottom-row rhs now holds -objective; iterate() treats increasing
    // values as progress, which matches minimization.
  }

  double objective_value() const { return -t[m][t.cols - 1]; }

  // Most negative basic value; a clean tableau never goes below roundoff.
  double min_rhs() const {
    double worst = 0.0;
    for (int i = 0; i < m; ++i) worst = std::min(worst, rhs(i));
    return worst;
  }

  // Dual simplex pass run after an optimal bottom row: flushes the small
  // negative basic values the relaxed ratio test leaves behind, keeping the
  // reduced costs nonnegative.  Gives up quietly when nothing pivotable is
  // left; the caller checks min_rhs afterwards.
  void dual_cleanup(const std::vector<char>& banned, int& iter_budget) {
    for (int round = 0; round < 4 * m + 40; ++round) {
      int pr = -1;
      double worst = -opts.feas_tol;
      for (int i = 0; i < m; ++i) {
        if (rhs(i) < worst) {
          worst = rhs(i);
          pr = i;
        }
      }
      if (pr < 0) return;
      if (--iter_budget <= 0) return;

      // entering column: smallest reduced-cost ratio keeps the bottom row
      // nonnegative, ties go to the largest magnitude for stability
      const double* cost = t[m];
      const double* row = t[pr];
      double rowmag = 0.0;
      for (int j = 0; j < n + ns + na; ++j) {
        if (banned[static_cast<std::size_t>(j)]) continue;
        rowmag = std::max(rowmag, -row[j]);
      }
      const double a_floor = std::max(opts.pivot_tol, 1e-6 * rowmag);
      int pc = -1;
      double best_ratio = kInf;
      double best_mag = 0.0;
      for (int j = 0; j < n + ns + na; ++j) {
        if (banned[static_cast<std::size_t>(j)]) continue;
        const double a = row[j];
        if (a >= -a_floor) continue;
        const double ratio = std::max(cost[j], 0.0) / (-a);
        if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && -a > best_mag)) {
          best_ratio = ratio;
          best_mag = -a;
          pc = j;
        }
      }
      if (pc < 0) return;  // row has no negative entry to pivot on
      pivot(pr, pc);
    }
  }

  // Phase one: returns true when a feasible basis was found.
  bool phase_one(int& iter_budget, bool force_bland) {
    if (na == 0) return true;
    Vec c(static_cast<std::size_t>(n + ns + na), 0.0);
    for (int j = n + ns; j < n + ns + na; ++j) c[static_cast<std::size_t>(j)] = 1.0;
    load_costs(c);
    std::vector<char> banned(static_cast<std::size_t>(n + ns + na), 0);
    if (!iterate(banned, iter_budget, force_bland))
      throw std::runtime_error("lp: phase one reported unbounded");
    for (int r = 0; r < 2 && min_rhs() < -opts.feas_tol; ++r) {
      dual_cleanup(banned, iter_budget);
      rebuild();
    }
    if (objective_value() > 1e-7) return false;

    // Pivot artificials out of the basis where possible; rows where no
    // structural column is available are redundant and harmless, but the
    // artificial must stay banned from re-entering.
    for (int i = 0; i < m; ++i) {
      if (!is_artificial(basis[static_cast<std::size_t>(i)])) continue;
      int pc = -1;
      for (int j = 0; j < n + ns; ++j) {
        if (std::fabs(t[i][j]) > opts.pivot_tol) { pc = j; break; }
      }
      if (pc >= 0) pivot(i, pc);
    }
    return true;
  }
};

// Worst violation of the original constraints at v: equality residuals,
// one-sided inequality and bound excess.
double solution_violation(const LinearProgram& p, const Vec& v) {
  const std::size_t n = p.num_vars();
  double worst = 0.0;
  for (std::size_t i = 0; i < p.eq_lhs.size(); ++i) {
    double d = -p.eq_rhs[i];
    for (std::size_t j = 0; j < n; ++j) d += p.eq_lhs[i][j] * v[j];
    worst = std::max(worst, std::fabs(d));
  }
  for (std::size_t i = 0; i < p.ineq_lhs.size(); ++i) {
    double d = -p.ineq_rhs[i];
    for (std::size_t j = 0; j < n; ++j) d += p.ineq_lhs[i][j] * v[j];
    worst = std::max(worst, d);
  }
  for (std::size_t j = 0; j < n; ++j) {
    worst = std::max(worst, p.var_lower[j] - v[j]);
    if (p.var_upper[j] < kInf) worst = std::max(worst, v[j] - p.var_upper[j]);
  }
  return worst;
}

// tainted reports whether the verdict was reached on a tableau carrying
// negative basic values, i.e. one that can no longer be trusted.
LpSolution run_simplex(const LinearProgram& p, const SolverOptions& opts,
                       const std::vector<Row>& rows, bool force_bland,
                       bool* tainted) {
  const int n = static_cast<int>(p.num_vars());
  Simplex sx(rows, n, opts);
  int iter_budget = opts.max_iterations;
  if (!sx.phase_one(iter_budget, force_bland)) {
    if (tainted) *tainted = sx.min_rhs() < -1e-9;
    return {LpStatus::infeasible, 0.0, {}};
  }

  // Phase two on the real objective (in shifted coordinates the constant
  // objective offset c'l is added back at the end).
  Vec c(static_cast<std::size_t>(sx.n + sx.ns + sx.na), 0.0);
  const double osign = (p.sense == Sense::maximize) ? -1.0 : 1.0;
  for (int j = 0; j < n; ++j) c[static_cast<std::size_t>(j)] = osign * p.objective[static_cast<std::size_t>(j)];
  sx.load_costs(c);
  std::vector<char> banned(static_cast<std::size_t>(sx.n + sx.ns + sx.na), 0);
  for (int j = sx.n + sx.ns; j < sx.n + sx.ns + sx.na; ++j) banned[static_cast<std::size_t>(j)] = 1;
  if (!sx.iterate(banned, iter_budget, force_bland)) {
    if (tainted) *tainted = sx.min_rhs() < -1e-9;
    return {LpStatus::unbounded, 0.0, {}};
  }
  for (int r = 0; r < 2 && sx.min_rhs() < -opts.feas_tol; ++r) {
    sx.dual_cleanup(banned, iter_budget);
    sx.rebuild();
  }
  if (tainted) *tainted = sx.min_rhs() < -1e-8;

  Vec v(p.var_lower);
  for (int i = 0; i < sx.m; ++i) {
    const int b = sx.basis[static_cast<std::size_t>(i)];
    if (b < n) v[static_cast<std::size_t>(b)] += std::max(sx.rhs(i), 0.0);
  }
  double value = 0.0;
  for (int j = 0; j < n; ++j) value += p.objective[static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(j)];
  return {LpStatus::optimal, value, std::move(v)};
}

}  // namespace

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

LpSolution solve_lp(const LinearProgram& p, const SolverOptions& opts) {
  validate(p);
  std::vector<Row> rows;
  if (!gather_rows(p, opts, rows)) return {LpStatus::infeasible, 0.0, {}};

  bool tainted = false;
  LpSolution s = run_simplex(p, opts, rows, false, &tainted);
  // A tainted tableau or an "optimal" point that misses the constraints by
  // more than cleanup-level noise means the fast pivot order went sour;
  // redo the whole solve under Bland's index order and keep whichever
  // answer respects the constraints better.
  const double accept = 1e-7;
  double viol = (s.status == LpStatus::optimal) ? solution_violation(p, s.argument) : 0.0;
  if (tainted || viol > accept) {
    LpSolution r = run_simplex(p, opts, rows, true, nullptr);
    if (r.status == LpStatus::optimal) {
      const double rviol = solution_violation(p, r.argument);
      if (s.status != LpStatus::optimal || rviol < viol) {
        s = std::move(r);
        viol = rviol;
      }
    } else if (s.status != LpStatus::optimal || viol > accept) {
      return r;  // no acceptable first answer to fall back on
    }
    if (s.status == LpStatus::optimal && viol > 1e-5)
      throw std::runtime_error("lp: numerical breakdown");
  }
  return s;
}

bool check_feasible(const Mat& ineq_lhs, const Vec& ineq_rhs,
                    const Mat& eq_lhs, const Vec& eq_rhs,
                    const Vec& var_lower, const Vec& var_upper,
                    const SolverOptions& opts) {
  LinearProgram p;
  p.objective.assign(var_lower.size(), 0.0);
  p.ineq_lhs = ineq_lhs;
  p.ineq_rhs = ineq_rhs;
  p.eq_lhs = eq_lhs;
  p.eq_rhs = eq_rhs;
  p.var_lower = var_lower;
  p.var_upper = var_upper;
  return check_feasible(p, opts);
}

bool check_feasible(const LinearProgram& p, const SolverOptions& opts) {
  validate(p);
  std::vector<Row> rows;
  if (!gather_rows(p, opts, rows)) return false;
  {
    Simplex sx(rows, static_cast<int>(p.num_vars()), opts);
    int iter_budget = opts.max_iterations;
    const bool ok = sx.phase_one(iter_budget, false);
    if (sx.min_rhs() >= -1e-8) return ok;
  }
  // A negative basic value after phase one means the tableau degraded;
  // repeat the search under Bland's rule before trusting the verdict.
  Simplex sx(rows, static_cast<int>(p.num_vars()), opts);
  int iter_budget = opts.max_iterations;
  return sx.phase_one(iter_budget, true);
}

}  // namespace ivsensa

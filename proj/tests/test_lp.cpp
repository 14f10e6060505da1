#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>

#include "ivsensa/lp.hpp"

using namespace ivsensa;

namespace {

LinearProgram box_program(const Vec& objective, Sense sense, const Vec& lo, const Vec& hi) {
  LinearProgram p;
  p.objective = objective;
  p.sense = sense;
  p.var_lower = lo;
  p.var_upper = hi;
  return p;
}

// Exhaustive check over every candidate basic point: pick n active
// constraints among rows, bounds and equalities, solve the n-by-n system,
// keep points that satisfy everything.  Exact reference for small n.
struct VertexOracle {
  bool feasible = false;
  double best = 0.0;
};

bool solve_square(std::vector<Vec> a, Vec b, Vec& x) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-11) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c2 = col; c2 < n; ++c2) a[r][c2] -= f * a[col][c2];
      b[r] -= f * b[col];
    }
  }
  x.resize(b.size());
  for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

VertexOracle vertex_optimum(const LinearProgram& p, Sense sense) {
  const int n = static_cast<int>(p.num_vars());
  std::vector<Vec> rows;
  Vec rhs;
  for (std::size_t i = 0; i < p.ineq_lhs.size(); ++i) {
    rows.push_back(p.ineq_lhs[i]);
    rhs.push_back(p.ineq_rhs[i]);
  }
  for (int j = 0; j < n; ++j) {
    Vec lo(n, 0.0), hi(n, 0.0);
    lo[j] = -1.0;
    hi[j] = 1.0;
    rows.push_back(lo);
    rhs.push_back(-p.var_lower[j]);
    rows.push_back(hi);
    rhs.push_back(p.var_upper[j]);
  }
  const int total = static_cast<int>(rows.size());
  const int ne = static_cast<int>(p.eq_lhs.size());
  REQUIRE(ne <= n);

  VertexOracle out;
  std::vector<int> pick(n - ne);
  auto try_point = [&](const Vec& x) {
    for (std::size_t i = 0; i < p.ineq_lhs.size(); ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += p.ineq_lhs[i][j] * x[j];
      if (s > p.ineq_rhs[i] + 1e-8) return;
    }
    for (int i = 0; i < ne; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += p.eq_lhs[i][j] * x[j];
      if (std::fabs(s - p.eq_rhs[i]) > 1e-8) return;
    }
    for (int j = 0; j < n; ++j)
      if (x[j] < p.var_lower[j] - 1e-8 || x[j] > p.var_upper[j] + 1e-8) return;
    double v = 0.0;
    for (int j = 0; j < n; ++j) v += p.objective[j] * x[j];
    if (!out.feasible) {
      out.feasible = true;
      out.best = v;
    } else if (sense == Sense::maximize ? v > out.best : v < out.best) {
      out.best = v;
    }
  };

  // Iterate subsets of size n-ne of the inequality/bound rows.
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n - ne) {
      std::vector<Vec> a;
      Vec b;
      for (int i = 0; i < ne; ++i) {
        a.push_back(p.eq_lhs[i]);
        b.push_back(p.eq_rhs[i]);
      }
      for (int idx : pick) {
        a.push_back(rows[idx]);
        b.push_back(rhs[idx]);
      }
      Vec x;
      if (solve_square(a, b, x)) try_point(x);
      return;
    }
    for (int i = start; i < total; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return out;
}

LinearProgram random_lp(std::mt19937& rng, int n, int n_rows) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  LinearProgram p;
  p.objective.resize(n);
  for (auto& c : p.objective) c = coef(rng);
  p.sense = Sense::maximize;
  p.var_lower.assign(n, 0.0);
  p.var_upper.assign(n, 1.0);
  Vec anchor(n);
  for (auto& a : anchor) a = u01(rng);
  for (int i = 0; i < n_rows; ++i) {
    Vec row(n);
    double dot = 0.0;
    for (int j = 0; j < n; ++j) {
      row[j] = coef(rng);
      dot += row[j] * anchor[j];
    }
    // Shift so some rows cut close to the anchor and a few exclude it.
    p.ineq_rhs.push_back(dot + u01(rng) * 0.6 - 0.15);
    p.ineq_lhs.push_back(std::move(row));
  }
  return p;
}

}  // namespace

TEST_CASE("small box maximum") {
  LinearProgram p = box_program({1.0, 1.0}, Sense::maximize, {0.0, 0.0},
                                {std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity()});
  p.ineq_lhs = {{1.0, 0.0}, {0.0, 1.0}};
  p.ineq_rhs = {0.3, 0.4};
  auto s = solve_lp(p);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.value == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(s.argument[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(s.argument[1] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("contradictory rows are infeasible") {
  LinearProgram p = box_program({1.0}, Sense::maximize, {0.0}, {1.0});
  p.ineq_lhs = {{-1.0}, {1.0}};
  p.ineq_rhs = {-0.8, 0.75};  // x >= 0.8 and x <= 0.75
  CHECK(solve_lp(p).status == LpStatus::infeasible);
  CHECK_FALSE(check_feasible(p));
}

TEST_CASE("weighted box objective") {
  LinearProgram p = box_program({0.5, 0.5}, Sense::maximize, {0.2, 0.5}, {0.8, 0.9});
  auto s = solve_lp(p);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.value == doctest::Approx(0.85).epsilon(1e-12));
}

TEST_CASE("unbounded direction is reported") {
  LinearProgram p = box_program({1.0, 0.0}, Sense::maximize, {0.0, 0.0},
                                {std::numeric_limits<double>::infinity(), 1.0});
  CHECK(solve_lp(p).status == LpStatus::unbounded);
}

TEST_CASE("equality rows") {
  // x0 + x1 = 1 with x0 <= 0.25: max x0 is 0.25, min x0 is 0.
  LinearProgram p = box_program({1.0, 0.0}, Sense::maximize, {0.0, 0.0}, {1.0, 1.0});
  p.eq_lhs = {{1.0, 1.0}};
  p.eq_rhs = {1.0};
  p.ineq_lhs = {{1.0, 0.0}};
  p.ineq_rhs = {0.25};
  auto s = solve_lp(p);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.value == doctest::Approx(0.25).epsilon(1e-12));
  p.sense = Sense::minimize;
  auto s2 = solve_lp(p);
  REQUIRE(s2.status == LpStatus::optimal);
  CHECK(s2.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("degenerate all-zero rows") {
  LinearProgram p = box_program({1.0}, Sense::maximize, {0.0}, {1.0});
  p.ineq_lhs = {{0.0}};
  p.ineq_rhs = {0.5};  // vacuous, dropped
  auto s = solve_lp(p);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.value == doctest::Approx(1.0));

  p.ineq_rhs = {-0.5};  // 0 <= -0.5 can never hold
  CHECK(solve_lp(p).status == LpStatus::infeasible);
}

TEST_CASE("empty constraint set over a box is feasible") {
  CHECK(check_feasible({}, {}, {}, {}, {0.0, 0.0}, {1.0, 1.0}));
}

TEST_CASE("solution satisfies its own constraints") {
  std::mt19937 rng(20240901);
  for (int t = 0; t < 200; ++t) {
    auto p = random_lp(rng, 2 + t % 3, 3 + t % 4);
    auto s = solve_lp(p);
    if (s.status != LpStatus::optimal) continue;
    double v = 0.0;
    for (std::size_t j = 0; j < p.num_vars(); ++j) v += p.objective[j] * s.argument[j];
    CHECK(std::fabs(v - s.value) < 1e-9);
    for (std::size_t i = 0; i < p.ineq_lhs.size(); ++i) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < p.num_vars(); ++j) lhs += p.ineq_lhs[i][j] * s.argument[j];
      CHECK(lhs <= p.ineq_rhs[i] + 1e-9);
    }
    for (std::size_t j = 0; j < p.num_vars(); ++j) {
      CHECK(s.argument[j] >= p.var_lower[j] - 1e-9);
      CHECK(s.argument[j] <= p.var_upper[j] + 1e-9);
    }
  }
}

TEST_CASE("negated objective gives negated optimum") {
  // Strong duality in its cheapest form: max c'x == -min (-c)'x.
  std::mt19937 rng(77);
  for (int t = 0; t < 150; ++t) {
    auto p = random_lp(rng, 2 + t % 3, 4);
    auto hi = solve_lp(p);
    LinearProgram q = p;
    q.sense = Sense::minimize;
    for (auto& c : q.objective) c = -c;
    auto lo = solve_lp(q);
    REQUIRE(hi.status == lo.status);
    if (hi.status == LpStatus::optimal) CHECK(std::fabs(hi.value + lo.value) < 1e-7);
  }
}

TEST_CASE("agrees with vertex enumeration") {
  std::mt19937 rng(424242);
  for (int t = 0; t < 120; ++t) {
    const int n = 2 + t % 3;  // up to 4 variables
    auto p = random_lp(rng, n, 3 + t % 3);
    auto s = solve_lp(p);
    auto oracle = vertex_optimum(p, p.sense);
    if (!oracle.feasible) {
      CHECK(s.status == LpStatus::infeasible);
    } else {
      REQUIRE(s.status == LpStatus::optimal);
      CHECK(std::fabs(s.value - oracle.best) < 1e-7);
    }
  }
}

TEST_CASE("agrees with exhaustive grid search") {
  // Literal grid oracle in two dimensions: step 0.005, tolerance 0.01.
  std::mt19937 rng(99);
  for (int t = 0; t < 25; ++t) {
    auto p = random_lp(rng, 2, 4);
    auto s = solve_lp(p);
    std::optional<double> best;
    const double step = 0.005;
    for (int i = 0; i <= 200; ++i) {
      for (int j = 0; j <= 200; ++j) {
        const double x0 = i * step, x1 = j * step;
        bool ok = true;
        for (std::size_t r = 0; r < p.ineq_lhs.size() && ok; ++r)
          ok = p.ineq_lhs[r][0] * x0 + p.ineq_lhs[r][1] * x1 <= p.ineq_rhs[r] + 1e-12;
        if (!ok) continue;
        const double v = p.objective[0] * x0 + p.objective[1] * x1;
        if (!best || v > *best) best = v;
      }
    }
    if (s.status == LpStatus::optimal && best) {
      CHECK(std::fabs(s.value - *best) <= 0.01);
    } else if (s.status == LpStatus::optimal && !best) {
      // Feasible region too thin for the grid; nothing to compare.
      WARN_MESSAGE(true, "grid missed a thin feasible region");
    } else {
      CHECK_FALSE(best.has_value());
    }
  }
}

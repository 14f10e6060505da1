// Dense two-phase simplex for the small linear programs that arise when
// bounding treatment effects.  Sizes here are a few hundred rows at most,
// so a tableau method with Bland anti-cycling is plenty.
#pragma once

#include <string>
#include <vector>

namespace ivsensa {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

enum class Sense { minimize, maximize };

enum class LpStatus { optimal, infeasible, unbounded };

std::string to_string(LpStatus s);

// All constraints are  ineq_lhs * v <= ineq_rhs  and  eq_lhs * v == eq_rhs,
// plus componentwise bounds var_lower <= v <= var_upper.  Lower bounds must
// be finite; upper bounds may be +infinity.
struct LinearProgram {
  Vec objective;
  Sense sense = Sense::minimize;
  Mat ineq_lhs;
  Vec ineq_rhs;
  Mat eq_lhs;
  Vec eq_rhs;
  Vec var_lower;
  Vec var_upper;

  std::size_t num_vars() const { return objective.size(); }
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  Vec argument;  // empty unless status == optimal
};

struct SolverOptions {
  double feas_tol = 1e-9;   // phase-one optimum below this counts as feasible
  double pivot_tol = 1e-10; // entries smaller than this never pivot
  int max_iterations = 200000;
};

LpSolution solve_lp(const LinearProgram& p, const SolverOptions& opts = {});

// Phase one only: is the polyhedron nonempty?
bool check_feasible(const Mat& ineq_lhs, const Vec& ineq_rhs,
                    const Mat& eq_lhs, const Vec& eq_rhs,
                    const Vec& var_lower, const Vec& var_upper,
                    const SolverOptions& opts = {});
bool check_feasible(const LinearProgram& p, const SolverOptions& opts = {});

}  // namespace ivsensa

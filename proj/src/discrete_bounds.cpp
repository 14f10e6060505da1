#include "ivsensa/discrete_bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "ivsensa/bisect.hpp"
#include "ivsensa/parallel.hpp"

namespace ivsensa {

namespace {

// LP over v = (P(Y(x)=1|Z=0), P(Y(x)=1|Z=1)) for a binary distribution:
// box from the no-assumption bounds, rows from the sensitivity model.
LinearProgram binary_arm_program(const JointDiscreteDist& dist, const ModelKind& kind,
                                 int arm) {
  const auto box = noassumption_box(dist, arm);
  auto rows = build_discrete_constraints(kind, dist, arm, LinearConstraintSet::Form::binary);
  LinearProgram p;
  p.objective = {dist.pz[0], dist.pz[1]};
  p.sense = Sense::maximize;
  p.ineq_lhs = std::move(rows.lhs);
  p.ineq_rhs = std::move(rows.rhs);
  p.var_lower = {box.cell_bounds[0][1].lower, box.cell_bounds[1][1].lower};
  p.var_upper = {box.cell_bounds[0][1].upper, box.cell_bounds[1][1].upper};
  return p;
}

// LP over the stacked pmf p(y|z) of one arm: per-cell no-assumption bounds,
// one simplex row per instrument value, model rows on top.
LinearProgram general_arm_program(const JointDiscreteDist& dist, const ModelKind& kind,
                                  int arm) {
  const int sy = dist.n_y(arm);
  const int sz = dist.n_z();
  const auto box = noassumption_box(dist, arm);
  auto rows = build_discrete_constraints(kind, dist, arm, LinearConstraintSet::Form::general);
  LinearProgram p;
  const int dim = sy * sz;
  p.objective.assign(static_cast<std::size_t>(dim), 0.0);
  p.var_lower.resize(static_cast<std::size_t>(dim));
  p.var_upper.resize(static_cast<std::size_t>(dim));
  for (int z = 0; z < sz; ++z)
    for (int iy = 0; iy < sy; ++iy) {
      const auto& b = box.cell_bounds[static_cast<std::size_t>(z)][static_cast<std::size_t>(iy)];
      p.var_lower[static_cast<std::size_t>(z * sy + iy)] = b.lower;
      p.var_upper[static_cast<std::size_t>(z * sy + iy)] = b.upper;
    }
  for (int z = 0; z < sz; ++z) {
    Vec row(static_cast<std::size_t>(dim), 0.0);
    for (int iy = 0; iy < sy; ++iy) row[static_cast<std::size_t>(z * sy + iy)] = 1.0;
    p.eq_lhs.push_back(std::move(row));
    p.eq_rhs.push_back(1.0);
  }
  p.ineq_lhs = std::move(rows.lhs);
  p.ineq_rhs = std::move(rows.rhs);
  return p;
}

IdentifiedInterval solve_minmax(LinearProgram p) {
  p.sense = Sense::maximize;
  const auto hi = solve_lp(p);
  if (hi.status == LpStatus::infeasible) return IdentifiedInterval::empty();
  if (hi.status != LpStatus::optimal)
    throw std::runtime_error("bound program unexpectedly " + to_string(hi.status));
  p.sense = Sense::minimize;
  const auto lo = solve_lp(p);
  if (lo.status != LpStatus::optimal)
    throw std::runtime_error("bound program unexpectedly " + to_string(lo.status));
  return IdentifiedInterval::of(lo.value, hi.value);
}

bool arm_feasible(const JointDiscreteDist& dist, const ModelKind& kind, int arm) {
  if (dist.is_binary()) return check_feasible(binary_arm_program(dist, kind, arm));
  return check_feasible(general_arm_program(dist, kind, arm));
}

void require_binary(const JointDiscreteDist& dist, const char* what) {
  if (!dist.is_binary())
    throw std::invalid_argument(std::string(what) + " needs a binary 0/1 outcome; "
                                "discretize the outcome first");
}

}  // namespace

NoAssumptionBox noassumption_box(const JointDiscreteDist& dist, int arm) {
  if (arm < 0 || arm >= dist.n_x()) throw std::invalid_argument("treatment arm out of range");
  NoAssumptionBox box;
  box.arm = arm;
  box.cell_bounds.resize(static_cast<std::size_t>(dist.n_z()));
  for (int z = 0; z < dist.n_z(); ++z) {
    const double slack = 1.0 - dist.pi(arm, z);  // P(X != x | Z=z)
    for (int iy = 0; iy < dist.n_y(arm); ++iy) {
      const double lo = dist.cell(z, arm, iy);
      box.cell_bounds[static_cast<std::size_t>(z)].push_back(
          IdentifiedInterval::of(lo, std::min(lo + slack, 1.0)));
    }
  }
  return box;
}

IdentifiedInterval potential_prob_bounds(const JointDiscreteDist& dist,
                                         const ModelKind& kind, int arm) {
  require_binary(dist, "potential_prob_bounds");
  return solve_minmax(binary_arm_program(dist, kind, arm));
}

IdentifiedInterval pmf_bounds(const JointDiscreteDist& dist, const ModelKind& kind,
                              int arm, int y_index) {
  if (y_index < 0 || y_index >= dist.n_y(arm))
    throw std::invalid_argument("outcome index out of range");
  auto p = general_arm_program(dist, kind, arm);
  const int sy = dist.n_y(arm);
  for (int z = 0; z < dist.n_z(); ++z)
    p.objective[static_cast<std::size_t>(z * sy + y_index)] = dist.pz[static_cast<std::size_t>(z)];
  return solve_minmax(std::move(p));
}

IdentifiedInterval ate_bounds(const JointDiscreteDist& dist, const ModelKind& kind) {
  require_binary(dist, "ate_bounds");
  const auto p1 = potential_prob_bounds(dist, kind, 1);
  const auto p0 = potential_prob_bounds(dist, kind, 0);
  if (!p1.feasible || !p0.feasible) return IdentifiedInterval::empty();
  return IdentifiedInterval::of(p1.lower - p0.upper, p1.upper - p0.lower);
}

IdentifiedInterval att_bounds(const JointDiscreteDist& dist, const ModelKind& kind) {
  require_binary(dist, "att_bounds");
  const auto p0 = potential_prob_bounds(dist, kind, 0);
  if (!p0.feasible) return IdentifiedInterval::empty();
  // E[Y(0)|X=1] = (E[Y(0)] - E[Y|X=0] P(X=0)) / P(X=1); the treated-arm
  // term E[Y|X=1] is observed, so only E[Y(0)] carries the bounds.
  const double px1 = dist.prob_x(1);
  const double observed = dist.mean_y_given_x[0] * dist.prob_x(0);
  const double ey1 = dist.mean_y_given_x[1];
  return IdentifiedInterval::of(ey1 - (p0.upper - observed) / px1,
                                ey1 - (p0.lower - observed) / px1);
}

IdentifiedInterval bounds_for_target(const JointDiscreteDist& dist, const ModelKind& kind,
                                     const BoundTarget& target) {
  switch (target.kind) {
    case BoundTarget::Kind::ate: return ate_bounds(dist, kind);
    case BoundTarget::Kind::att: return att_bounds(dist, kind);
    case BoundTarget::Kind::prob: {
      require_binary(dist, "prob bounds");
      return potential_prob_bounds(dist, kind, target.arm);
    }
    case BoundTarget::Kind::pmf: return pmf_bounds(dist, kind, target.arm, target.y_index);
  }
  throw std::invalid_argument("unknown bound target");
}

FalsificationResult falsification_point(const JointDiscreteDist& dist, ModelTag tag,
                                        double tol) {
  FalsificationResult out;
  for (int arm = 0; arm < dist.n_x(); ++arm) {
    auto feasible_at = [&](double th) { return arm_feasible(dist, {tag, th}, arm); };
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

BreakdownResult breakdown_point(const JointDiscreteDist& dist, ModelTag tag,
                                const BoundTarget& target, double value, double tol) {
  const double start = falsification_point(dist, tag, tol).theta;
  auto contained = [&](double th) {
    return bounds_for_target(dist, {tag, th}, target).contains(value);
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

SensitivityCurve sensitivity_curve(const JointDiscreteDist& dist, ModelTag tag,
                                   const Vec& thetas, const BoundTarget& target) {
  SensitivityCurve curve;
  curve.rows.resize(thetas.size());
  parallel_for(static_cast<int>(thetas.size()), [&](int i) {
    const double th = thetas[static_cast<std::size_t>(i)];
    curve.rows[static_cast<std::size_t>(i)] = {th, bounds_for_target(dist, {tag, th}, target)};
  });
  return curve;
}

}  // namespace ivsensa

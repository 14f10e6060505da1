// Sharp bounds for discrete outcomes: everything reduces to small linear
// programs over the per-instrument outcome laws of one treatment arm.
#pragma once

#include "ivsensa/distribution.hpp"
#include "ivsensa/sensitivity.hpp"
#include "ivsensa/types.hpp"

namespace ivsensa {

// Per-instrument interval [P(Y=y,X=x|Z=z), P(Y=y,X=x|Z=z) + P(X!=x|Z=z)]
// for each outcome value; these are the bounds with no instrument
// assumption at all.
struct NoAssumptionBox {
  int arm = 0;
  std::vector<std::vector<IdentifiedInterval>> cell_bounds;  // [z][iy]
};

NoAssumptionBox noassumption_box(const JointDiscreteDist& dist, int arm);

// Bounds on P(Y(x)=1) for the given arm, binary outcome.
IdentifiedInterval potential_prob_bounds(const JointDiscreteDist& dist,
                                         const ModelKind& kind, int arm);

// Bounds on P(Y(x)=y) for a general finite outcome support.
IdentifiedInterval pmf_bounds(const JointDiscreteDist& dist, const ModelKind& kind,
                              int arm, int y_index);

// E[Y(1)] - E[Y(0)] for binary outcomes.
IdentifiedInterval ate_bounds(const JointDiscreteDist& dist, const ModelKind& kind);

// E[Y(1) - Y(0) | X=1] for binary outcomes; only the untreated arm needs
// bounding, the treated term is observed.
IdentifiedInterval att_bounds(const JointDiscreteDist& dist, const ModelKind& kind);

struct BoundTarget {
  enum class Kind { ate, att, prob, pmf };
  Kind kind = Kind::ate;
  int arm = 1;      // prob and pmf
  int y_index = 0;  // pmf
};

IdentifiedInterval bounds_for_target(const JointDiscreteDist& dist, const ModelKind& kind,
                                     const BoundTarget& target);

// Falsification point, found per arm by bisection on constraint-set
// feasibility, then combined with max.
FalsificationResult falsification_point(const JointDiscreteDist& dist, ModelTag tag,
                                        double tol = 1e-6);

// Breakdown search: returns the falsification point itself when the value
// is inside right away, and sets `never` when even theta = 1 excludes it.
BreakdownResult breakdown_point(const JointDiscreteDist& dist, ModelTag tag,
                                const BoundTarget& target, double value,
                                double tol = 1e-6);

SensitivityCurve sensitivity_curve(const JointDiscreteDist& dist, ModelTag tag,
                                   const Vec& thetas, const BoundTarget& target);

}  // namespace ivsensa

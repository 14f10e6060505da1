#pragma once

#include <limits>
#include <vector>

namespace ivsensa {

// Sharp lower/upper bound on a scalar target.  When the constraint set is
// empty at the requested strength the interval is marked infeasible and the
// endpoints are NaN.
struct IdentifiedInterval {
  bool feasible = false;
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();

  static IdentifiedInterval empty() { return {}; }
  static IdentifiedInterval of(double lo, double hi) { return {true, lo, hi}; }
  bool contains(double v, double tol = 1e-9) const {
    return feasible && v >= lower - tol && v <= upper + tol;
  }
  double width() const { return upper - lower; }
};

struct CurveRow {
  double theta = 0.0;
  IdentifiedInterval interval;
};

struct SensitivityCurve {
  std::vector<CurveRow> rows;
};

// Smallest theta at which the model survives falsification, with the
// per-arm thresholds the maximum was taken over.
struct FalsificationResult {
  double theta = 0.0;
  std::vector<double> per_arm;
};

// Smallest theta at which a reference value enters the target interval.
// `never` flags a value excluded even with the assumption fully dropped.
struct BreakdownResult {
  bool never = false;
  double theta = 1.0;
};

}  // namespace ivsensa

#pragma once

#include <functional>

namespace ivsensa {

// Smallest point in [lo, hi] where a monotone predicate flips to true,
// located to within tol.  Requires pred(hi); pred(lo) must be false.
// Returns the true end of the final bracket so the result always satisfies
// the predicate up to the tolerance.
inline double bisect_threshold(const std::function<bool(double)>& pred, double lo,
                               double hi, double tol, int max_iter = 60) {
  for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace ivsensa

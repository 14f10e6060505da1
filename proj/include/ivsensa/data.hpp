// Raw observations and the few outcome transforms the pipelines need.
#pragma once

#include <string>
#include <vector>

namespace ivsensa {

struct Observation {
  double y = 0.0;
  std::string x;
  std::string z;
  double w = 1.0;
};

struct Dataset {
  std::vector<Observation> rows;
  bool has_weights = false;
};

// Maps a unit-interval outcome u back to raw units via y = shift + scale * u.
struct AffineMap {
  double shift = 0.0;
  double scale = 1.0;
};

// CSV with a header naming columns y,x,z and optionally w (any order).
// y must be numeric, x and z are kept as labels, w must be nonnegative.
Dataset read_csv(const std::string& path);
void write_csv(const std::string& path, const Dataset& data);

// Smallest y with empirical cdf mass >= q; ties at the cut go to the <= side.
double empirical_quantile(const Dataset& data, double q);

struct DiscretizeResult {
  Dataset data;  // y replaced by indicator(y <= cut)
  double cut = 0.0;
};
DiscretizeResult discretize_outcome(const Dataset& data, double q);

struct RescaleResult {
  Dataset data;
  AffineMap map;
};
// Min-max map onto [0,1]; data already inside [0,1] is left untouched so the
// transform is idempotent.  A constant outcome cannot be rescaled.
RescaleResult rescale_outcome(const Dataset& data);

}  // namespace ivsensa

// Instrument relaxations, each indexed by a strength theta in [0,1]:
//   msm   odds-style bound on P(Y(x)=y | Z) ratios, theta = 1 - 1/Lambda
//   cdep  bound |P(Z=z | Y(x)) - P(Z=z)| <= theta
//   ks    sup-distance between outcome cdfs across instrument values
// theta = 0 forces the classical exclusion restriction, theta = 1 imposes
// nothing.  The builders emit linear rows for the bound programs.
#pragma once

#include <utility>

#include "ivsensa/distribution.hpp"
#include "ivsensa/lp.hpp"

namespace ivsensa {

enum class ModelTag { msm, cdep, ks };

ModelTag parse_model_tag(const std::string& name);
std::string to_string(ModelTag tag);

struct ModelKind {
  ModelTag tag = ModelTag::msm;
  double theta = 0.0;
};

// Rows lhs * v <= rhs over model-specific coordinates, see `form`.
struct LinearConstraintSet {
  enum class Form {
    binary,   // v = (P(Y(x)=1|Z=0), P(Y(x)=1|Z=1))
    general,  // v = vectorized pmf p(y|z), column index z * s_y + iy
    density,  // componentwise rows A f(y) <= a on (f(y|Z=0), f(y|Z=1))
  };
  Form form = Form::binary;
  Mat lhs;
  Vec rhs;
  int s_y = 0;  // general form only
  int s_z = 0;
};

// Attenuation factors (k_0, k_1) entering the cdep rows: k_z scales how far
// the outcome law under one instrument value may drift from the other.
// k_z(0) = 1 (full exclusion), k_z(1) = 0 (no restriction).
std::pair<double, double> cdep_factors(double c, const Vec& pz);

// Rows over the potential-outcome law for one treatment arm.  The binary
// form yields the four printed 2-column rows; the general form covers any
// finite outcome support and any number of instrument values.
LinearConstraintSet build_discrete_constraints(const ModelKind& kind,
                                               const JointDiscreteDist& dist, int arm,
                                               LinearConstraintSet::Form form);

// Componentwise rows for the continuous pipeline, evaluated pointwise in y.
// ks with theta = 1 returns no rows (the bound degenerates to +infinity).
LinearConstraintSet build_density_constraints(const ModelKind& kind, const Vec& pz);

}  // namespace ivsensa

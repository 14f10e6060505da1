#include "ivsensa/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ivsensa {

namespace {

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::invalid_argument("model strength theta must lie in [0,1]");
}

}  // namespace

ModelTag parse_model_tag(const std::string& name) {
  if (name == "msm") return ModelTag::msm;
  if (name == "cdep") return ModelTag::cdep;
  if (name == "ks") return ModelTag::ks;
  throw std::invalid_argument("unknown sensitivity model '" + name + "'");
}

std::string to_string(ModelTag tag) {
  switch (tag) {
    case ModelTag::msm: return "msm";
    case ModelTag::cdep: return "cdep";
    case ModelTag::ks: return "ks";
  }
  return "unknown";
}

std::pair<double, double> cdep_factors(double c, const Vec& pz) {
  check_theta(c);
  if (pz.size() != 2) throw std::invalid_argument("cdep_factors needs a binary instrument");
  auto k = [&](int z) {
    const double own = pz[static_cast<std::size_t>(z)];
    const double other = pz[static_cast<std::size_t>(1 - z)];
    return own * std::max(other - c, 0.0) / (other * std::min(own + c, 1.0));
  };
  return {k(0), k(1)};
}

LinearConstraintSet build_discrete_constraints(const ModelKind& kind,
                                               const JointDiscreteDist& dist, int arm,
                                               LinearConstraintSet::Form form) {
  check_theta(kind.theta);
  if (arm < 0 || arm >= dist.n_x()) throw std::invalid_argument("treatment arm out of range");
  if (form == LinearConstraintSet::Form::density)
    throw std::invalid_argument("density form is built by build_density_constraints");

  LinearConstraintSet out;
  out.form = form;
  out.s_z = dist.n_z();
  const double th = kind.theta;

  if (form == LinearConstraintSet::Form::binary) {
    if (!dist.is_binary())
      throw std::invalid_argument("binary constraint form needs a binary distribution");
    out.s_y = 2;
    switch (kind.tag) {
      case ModelTag::msm:
        out.lhs = {{1.0 - th, -1.0}, {-1.0, 1.0 - th}, {th - 1.0, 1.0}, {1.0, th - 1.0}};
        out.rhs = {0.0, 0.0, th, th};
        break;
      case ModelTag::cdep: {
        const auto [k0, k1] = cdep_factors(th, dist.pz);
        out.lhs = {{k0, -1.0}, {-1.0, k1}, {-k0, 1.0}, {1.0, -k1}};
        out.rhs = {0.0, 0.0, 1.0 - k0, 1.0 - k1};
        break;
      }
      case ModelTag::ks:
        out.lhs = {{1.0, -1.0}, {-1.0, 1.0}};
        out.rhs = {th, th};
        break;
    }
    return out;
  }

  // General form over the stacked pmf coordinates p(y|z).
  const int sy = dist.n_y(arm);
  const int sz = dist.n_z();
  out.s_y = sy;
  const int dim = sy * sz;
  auto col = [&](int z, int iy) { return z * sy + iy; };

  switch (kind.tag) {
    case ModelTag::msm:
      // (1-th) p(y|z') <= p(y|z) for every ordered instrument pair and y.
      for (int z = 0; z < sz; ++z)
        for (int zp = 0; zp < sz; ++zp) {
          if (z == zp) continue;
          for (int iy = 0; iy < sy; ++iy) {
            Vec row(static_cast<std::size_t>(dim), 0.0);
            row[static_cast<std::size_t>(col(zp, iy))] = 1.0 - th;
            row[static_cast<std::size_t>(col(z, iy))] -= 1.0;
            out.lhs.push_back(std::move(row));
            out.rhs.push_back(0.0);
          }
        }
      break;
    case ModelTag::cdep:
      // |P(Z=z|Y(x)=y) - P(Z=z)| <= th, written through Bayes' rule against
      // the mixture mass sum_z' p(y|z') P(Z=z').
      for (int z = 0; z < sz; ++z) {
        const double own = dist.pz[static_cast<std::size_t>(z)];
        for (int iy = 0; iy < sy; ++iy) {
          Vec up(static_cast<std::size_t>(dim), 0.0);
          Vec dn(static_cast<std::size_t>(dim), 0.0);
          for (int zp = 0; zp < sz; ++zp) {
            const double mass = dist.pz[static_cast<std::size_t>(zp)];
            up[static_cast<std::size_t>(col(zp, iy))] = -(own + th) * mass;
            dn[static_cast<std::size_t>(col(zp, iy))] = (own - th) * mass;
          }
          up[static_cast<std::size_t>(col(z, iy))] += own;
          dn[static_cast<std::size_t>(col(z, iy))] -= own;
          out.lhs.push_back(std::move(up));
          out.rhs.push_back(0.0);
          out.lhs.push_back(std::move(dn));
          out.rhs.push_back(0.0);
        }
      }
      break;
    case ModelTag::ks:
      // Partial-sum (cdf) gaps along the sorted support, every pair of
      // instrument values; the full-support cut is vacuous and skipped.
      for (int z = 0; z < sz; ++z)
        for (int zp = z + 1; zp < sz; ++zp)
          for (int t = 0; t + 1 < sy; ++t) {
            Vec row(static_cast<std::size_t>(dim), 0.0);
            for (int iy = 0; iy <= t; ++iy) {
              row[static_cast<std::size_t>(col(z, iy))] = 1.0;
              row[static_cast<std::size_t>(col(zp, iy))] = -1.0;
            }
            Vec neg(row.size());
            std::transform(row.begin(), row.end(), neg.begin(), std::negate<>());
            out.lhs.push_back(std::move(row));
            out.rhs.push_back(th);
            out.lhs.push_back(std::move(neg));
            out.rhs.push_back(th);
          }
      break;
  }
  return out;
}

LinearConstraintSet build_density_constraints(const ModelKind& kind, const Vec& pz) {
  check_theta(kind.theta);
  if (pz.size() != 2)
    throw std::invalid_argument("density constraints need a binary instrument");
  LinearConstraintSet out;
  out.form = LinearConstraintSet::Form::density;
  out.s_z = 2;
  const double th = kind.theta;
  switch (kind.tag) {
    case ModelTag::msm:
      out.lhs = {{-1.0, 1.0 - th}, {1.0 - th, -1.0}};
      out.rhs = {0.0, 0.0};
      break;
    case ModelTag::cdep: {
      const auto [k0, k1] = cdep_factors(th, pz);
      out.lhs = {{-1.0, k1}, {k0, -1.0}};
      out.rhs = {0.0, 0.0};
      break;
    }
    case ModelTag::ks:
      if (th == 1.0) break;  // bound K/(1-K) degenerates, no restriction
      out.lhs = {{1.0, -1.0}, {-1.0, 1.0}};
      out.rhs = {th / (1.0 - th), th / (1.0 - th)};
      break;
  }
  return out;
}

}  // namespace ivsensa

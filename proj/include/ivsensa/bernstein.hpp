// Bernstein polynomial basis scaled to unit mass: each element integrates
// to one over [0,1], so simplex weight vectors are exactly the densities
// representable at a given degree.
#pragma once

#include "ivsensa/lp.hpp"

namespace ivsensa {

// b_m(y) = (M+1) * C(M,m) * y^m * (1-y)^(M-m) for m = 0..M.
Vec bernstein_basis(int degree, double y);

// Degree-M operator value (B_M f)(y) = (1/(M+1)) * sum_m f(m/M) b_m(y)
// from samples of f on the grid m/M.
double bernstein_approx(const Vec& grid_values, double y);

// Exact integrals I_m(a) = integral_0^a b_m, i.e. the cdf of each basis
// density; equals the upper tail of a Binomial(M+1, a) pmf.
Vec bernstein_cdf(int degree, double a);

}  // namespace ivsensa

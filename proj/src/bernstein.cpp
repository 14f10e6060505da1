#include "ivsensa/bernstein.hpp"

#include <cmath>
#include <stdexcept>

namespace ivsensa {

namespace {

void check_args(int degree, double y) {
  if (degree < 0) throw std::invalid_argument("bernstein degree must be nonnegative");
  if (!(y >= 0.0 && y <= 1.0))
    throw std::invalid_argument("bernstein basis evaluated outside [0,1]");
}

// Unscaled terms C(n,m) y^m (1-y)^(n-m); binomials grow along the row so
// everything stays exact in doubles well past the degrees used here.
Vec binomial_terms(int n, double y) {
  Vec out(static_cast<std::size_t>(n + 1));
  Vec pow_y(static_cast<std::size_t>(n + 1), 1.0);
  Vec pow_q(static_cast<std::size_t>(n + 1), 1.0);
  const double q = 1.0 - y;
  for (int i = 1; i <= n; ++i) {
    pow_y[static_cast<std::size_t>(i)] = pow_y[static_cast<std::size_t>(i - 1)] * y;
    pow_q[static_cast<std::size_t>(i)] = pow_q[static_cast<std::size_t>(i - 1)] * q;
  }
  double binom = 1.0;
  for (int m = 0; m <= n; ++m) {
    out[static_cast<std::size_t>(m)] =
        binom * pow_y[static_cast<std::size_t>(m)] * pow_q[static_cast<std::size_t>(n - m)];
    binom = binom * (n - m) / (m + 1);
  }
  return out;
}

}  // namespace

Vec bernstein_basis(int degree, double y) {
  check_args(degree, y);
  Vec out = binomial_terms(degree, y);
  for (double& v : out) v *= degree + 1;
  return out;
}

double bernstein_approx(const Vec& grid_values, double y) {
  if (grid_values.empty()) throw std::invalid_argument("empty sample grid");
  const int degree = static_cast<int>(grid_values.size()) - 1;
  const Vec terms = binomial_terms(degree, y);  // basis / (M+1), saves the rescale
  double s = 0.0;
  for (std::size_t m = 0; m < grid_values.size(); ++m) s += grid_values[m] * terms[m];
  return s;
}

Vec bernstein_cdf(int degree, double a) {
  check_args(degree, a);
  // integral_0^a b_m = sum_{k>m} C(M+1,k) a^k (1-a)^(M+1-k): suffix sums of
  // the degree-(M+1) binomial row.
  const Vec terms = binomial_terms(degree + 1, a);
  Vec out(static_cast<std::size_t>(degree + 1), 0.0);
  double tail = 0.0;
  for (int m = degree; m >= 0; --m) {
    tail += terms[static_cast<std::size_t>(m + 1)];
    out[static_cast<std::size_t>(m)] = std::min(tail, 1.0);
  }
  return out;
}

}  // namespace ivsensa

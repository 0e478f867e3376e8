#pragma once

// One-sided binomial upper limits. `solve_delta` is the Chernoff-relaxed limit
// that defines the polytope facets; `exact_cp_upper` is the exact
// Clopper-Pearson limit, kept as the reference it must dominate.

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "qpoly/error.hpp"

namespace qpoly {

/// Bernoulli Kullback-Leibler divergence D(x||y) in nats, 0 log 0 = 0.
inline double binary_kl(double x, double y) {
  if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0))
    throw Error(ErrorKind::DomainError, "binary_kl arguments must lie in [0,1]");
  if (x == y) return 0.0;
  if (y == 0.0 || y == 1.0)
    throw Error(ErrorKind::DomainError, "binary_kl diverges for y in {0,1} with x != y");
  double d = 0.0;
  if (x > 0.0) d += x * std::log(x / y);
  if (x < 1.0) d += (1.0 - x) * (std::log1p(-x) - std::log1p(-y));
  return std::max(d, 0.0);
}

struct DeltaSolution {
  double delta = 0.0;
  double bound = 1.0;  // min(1, n_i/n + delta)
  bool clamped = false;
  double residual = 0.0;  // D(x||bound) + ln(eps_i)/n
};

namespace detail {
inline void check_counts(std::int64_t ni, std::int64_t n) {
  if (n < 1 || ni < 0 || ni > n) throw Error(ErrorKind::DomainError, "require 0 <= n_i <= n, n >= 1");
}
inline void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::DomainError, "eps_i must lie in (0,1)");
}
}  // namespace detail

/// Positive root delta of D(n_i/n || n_i/n + delta) = -ln(eps_i)/n.
///
/// D(x||x+delta) increases strictly on (0, 1-x) and diverges at the right end,
/// so bisection always brackets the root when n_i < n. It runs until the
/// bracket stops shrinking in double precision (at most 200 halvings). For
/// n_i = n no positive root exists and the facet is vacuous: bound = 1.
inline DeltaSolution solve_delta(std::int64_t ni, std::int64_t n, double eps_i) {
  detail::check_counts(ni, n);
  detail::check_eps(eps_i);
  const double x = static_cast<double>(ni) / static_cast<double>(n);
  const double target = -std::log(eps_i) / static_cast<double>(n);
  DeltaSolution out;
  if (ni == n) {
    out.delta = 0.0;
    out.bound = 1.0;
    out.clamped = true;
    return out;
  }
  double lo = 0.0;
  double hi = 1.0 - x;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double y = x + mid;
    if (y >= 1.0) {
      hi = mid;
      continue;
    }
    if (binary_kl(x, y) < target)
      lo = mid;
    else
      hi = mid;
  }
  out.delta = hi;
  out.bound = x + hi;
  if (out.bound >= 1.0) {
    out.bound = 1.0;
    out.delta = 1.0 - x;
    out.clamped = true;
    return out;
  }
  out.residual = binary_kl(x, out.bound) - target;
  return out;
}

/// P[X <= n_i] for X ~ Binomial(n, p), via the regularised incomplete beta.
inline double binomial_tail(std::int64_t ni, std::int64_t n, double p) {
  if (n < 0 || ni < 0 || ni > n) throw Error(ErrorKind::DomainError, "require 0 <= n_i <= n");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::DomainError, "p must lie in [0,1]");
  if (ni == n) return 1.0;
  if (p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  return boost::math::ibetac(static_cast<double>(ni + 1), static_cast<double>(n - ni), p);
}

/// One-sided exact Clopper-Pearson upper limit: the p* in (n_i/n, 1) with
/// binomial_tail(n_i, n, p*) = eps_i, or 1 when n_i = n.
inline double exact_cp_upper(std::int64_t ni, std::int64_t n, double eps_i) {
  detail::check_counts(ni, n);
  detail::check_eps(eps_i);
  if (ni == n) return 1.0;
  double lo = static_cast<double>(ni) / static_cast<double>(n);
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (binomial_tail(ni, n, mid) > eps_i)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace qpoly

#pragma once

// Dense two-phase tableau simplex for   maximise c.x  s.t.  A x <= b,
// x free. Free variables are split as x = x+ - x-. Pivoting follows Bland's
// rule, so degenerate vertices (common where several facets meet) cannot
// cycle. Every optimum is returned with a dual vector and checked against a
// primal/dual feasibility and zero-gap certificate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qpoly/quantum_core.hpp"

namespace qpoly {

struct LinearProgram {
  RVector objective;
  RMatrix a;  // one row per constraint
  RVector b;
};

enum class LpStatus { optimal, infeasible, unbounded, numerical_failure };

struct LpResult {
  LpStatus status = LpStatus::numerical_failure;
  RVector x;
  double value = 0.0;
  RVector dual;                   // y >= 0 with A^T y = c, b.y = c.x
  double certificate_error = 0.0;  // worst violation across the certificate checks
};

namespace detail {

class SimplexTableau {
 public:
  SimplexTableau(const RMatrix& a, const RVector& b, const RVector& c)
      : m_(static_cast<int>(b.size())),
        n_(static_cast<int>(c.size())),
        basic_(static_cast<std::size_t>(m_)),
        nonbasic_(static_cast<std::size_t>(n_ + 1)),
        t_(m_ + 2, n_ + 2) {
    t_.setZero();
    t_.topLeftCorner(m_, n_) = a;
    for (int i = 0; i < m_; ++i) {
      basic_[static_cast<std::size_t>(i)] = n_ + i;
      t_(i, n_) = -1.0;
      t_(i, n_ + 1) = b(i);
    }
    for (int j = 0; j < n_; ++j) {
      nonbasic_[static_cast<std::size_t>(j)] = j;
      t_(m_, j) = -c(j);
    }
    nonbasic_[static_cast<std::size_t>(n_)] = -1;
    t_(m_ + 1, n_) = 1.0;
  }

  /// +inf: unbounded, -inf: infeasible, otherwise the optimal value.
  double solve(RVector& x, RVector& dual) {
    int r = 0;
    for (int i = 1; i < m_; ++i)
      if (t_(i, n_ + 1) < t_(r, n_ + 1)) r = i;
    if (m_ > 0 && t_(r, n_ + 1) < -kEps) {
      pivot(r, n_);
      if (!run(1) || t_(m_ + 1, n_ + 1) < -kFeasEps) return -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i)
        if (basic_[static_cast<std::size_t>(i)] == -1) {
          int s = -1;
          for (int j = 0; j <= n_; ++j)
            if (s == -1 || t_(i, j) < t_(i, s) ||
                (t_(i, j) == t_(i, s) && nonbasic_[static_cast<std::size_t>(j)] < nonbasic_[static_cast<std::size_t>(s)]))
              s = j;
          pivot(i, s);
        }
    }
    if (!run(2)) return std::numeric_limits<double>::infinity();
    x = RVector::Zero(n_);
    for (int i = 0; i < m_; ++i)
      if (basic_[static_cast<std::size_t>(i)] >= 0 && basic_[static_cast<std::size_t>(i)] < n_)
        x(basic_[static_cast<std::size_t>(i)]) = t_(i, n_ + 1);
    dual = RVector::Zero(m_);
    for (int j = 0; j <= n_; ++j)
      if (nonbasic_[static_cast<std::size_t>(j)] >= n_) dual(nonbasic_[static_cast<std::size_t>(j)] - n_) = t_(m_, j);
    return t_(m_, n_ + 1);
  }

 private:
  static constexpr double kEps = 1e-11;
  static constexpr double kFeasEps = 1e-9;

  void pivot(int r, int s) {
    const double inv = 1.0 / t_(r, s);
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r || t_(i, s) == 0.0) continue;
      const double f = t_(i, s) * inv;
      for (int j = 0; j < n_ + 2; ++j)
        if (j != s) t_(i, j) -= t_(r, j) * f;
      t_(i, s) = -f;
    }
    for (int j = 0; j < n_ + 2; ++j)
      if (j != s) t_(r, j) *= inv;
    t_(r, s) = inv;
    std::swap(basic_[static_cast<std::size_t>(r)], nonbasic_[static_cast<std::size_t>(s)]);
  }

  // Bland: lowest-index improving column, ratio ties to lowest basic index.
  bool run(int phase) {
    const int row = phase == 1 ? m_ + 1 : m_;
    for (;;) {
      int s = -1;
      for (int j = 0; j <= n_; ++j) {
        const int var = nonbasic_[static_cast<std::size_t>(j)];
        if (phase == 2 && var == -1) continue;
        if (t_(row, j) < -kEps && (s == -1 || var < nonbasic_[static_cast<std::size_t>(s)])) s = j;
      }
      if (s == -1) return true;
      int r = -1;
      double best = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (t_(i, s) <= kEps) continue;
        const double ratio = t_(i, n_ + 1) / t_(i, s);
        if (r == -1 || ratio < best - kEps ||
            (ratio <= best + kEps && basic_[static_cast<std::size_t>(i)] < basic_[static_cast<std::size_t>(r)])) {
          r = i;
          best = ratio;
        }
      }
      if (r == -1) return false;
      pivot(r, s);
    }
  }

  int m_;
  int n_;
  std::vector<int> basic_;
  std::vector<int> nonbasic_;
  RMatrix t_;
};

}  // namespace detail

inline LpResult solve_lp(const LinearProgram& lp) {
  const auto n = lp.objective.size();
  if (lp.a.cols() != n || lp.a.rows() != lp.b.size())
    throw Error(ErrorKind::DimensionMismatch, "linear program has inconsistent shapes");
  RMatrix split(lp.a.rows(), 2 * n);
  split << lp.a, -lp.a;
  RVector c2(2 * n);
  c2 << lp.objective, -lp.objective;

  detail::SimplexTableau tableau(split, lp.b, c2);
  RVector xs, dual;
  const double value = tableau.solve(xs, dual);
  LpResult out;
  if (value == std::numeric_limits<double>::infinity()) {
    out.status = LpStatus::unbounded;
    return out;
  }
  if (value == -std::numeric_limits<double>::infinity()) {
    out.status = LpStatus::infeasible;
    return out;
  }
  out.x = xs.head(n) - xs.tail(n);
  out.value = lp.objective.dot(out.x);
  out.dual = dual;

  const double scale = 1.0 + lp.b.cwiseAbs().maxCoeff() + lp.objective.cwiseAbs().maxCoeff();
  double err = 0.0;
  if (lp.a.rows() > 0) {
    err = std::max(err, (lp.a * out.x - lp.b).maxCoeff());
    err = std::max(err, -dual.minCoeff());
    err = std::max(err, (lp.a.transpose() * dual - lp.objective).cwiseAbs().maxCoeff());
    err = std::max(err, std::abs(lp.b.dot(dual) - out.value));
  } else {
    err = lp.objective.cwiseAbs().maxCoeff();
  }
  out.certificate_error = err;
  out.status = err <= 1e-8 * scale ? LpStatus::optimal : LpStatus::numerical_failure;
  return out;
}

}  // namespace qpoly

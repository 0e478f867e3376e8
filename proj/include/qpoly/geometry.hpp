#pragma once

// Geometric queries on confidence polytopes: a strictly feasible start state,
// hit-and-run sampling of (facets ∩ state body), the axis-aligned bounding
// box of the facet system and its Chebyshev (largest inscribed) ball.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qpoly/lp.hpp"
#include "qpoly/parallel.hpp"
#include "qpoly/polytope.hpp"
#include "qpoly/random.hpp"

namespace qpoly {

/// Positivity test used along sampler chords: Cholesky of rho + 1e-12 * 1.
inline bool psd_for_sampling(const CMatrix& rho) {
  const auto d = rho.rows();
  return is_positive_definite(rho + 1e-12 * CMatrix::Identity(d, d));
}

namespace detail {

inline CMatrix direction_matrix(const RVector& u, const HermitianBasis& basis) {
  const int d = basis.dim();
  CMatrix m = CMatrix::Zero(d, d);
  for (std::size_t j = 0; j < basis.size(); ++j) m += u(static_cast<Eigen::Index>(j)) * basis[j];
  return m * (embedding_scale(d) / d);
}

/// Chebyshev LP over rows (a_i, |a_i|) plus optional |x_j| <= 1 box.
inline LpResult chebyshev_lp(const RMatrix& a, const RVector& b, bool unit_box) {
  const auto dim = a.cols();
  const auto rows = a.rows() + 1 + (unit_box ? 2 * dim : 0);
  LinearProgram lp;
  lp.a = RMatrix::Zero(rows, dim + 1);
  lp.b = RVector::Zero(rows);
  lp.objective = RVector::Zero(dim + 1);
  lp.objective(dim) = 1.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    lp.a.row(i).head(dim) = a.row(i);
    lp.a(i, dim) = a.row(i).norm();
    lp.b(i) = b(i);
  }
  Eigen::Index r = a.rows();
  lp.a(r, dim) = -1.0;
  lp.b(r) = 0.0;
  ++r;
  if (unit_box)
    for (Eigen::Index j = 0; j < dim; ++j) {
      lp.a(r, j) = 1.0;
      lp.a(r, dim) = 1.0;
      lp.b(r++) = 1.0;
      lp.a(r, j) = -1.0;
      lp.a(r, dim) = 1.0;
      lp.b(r++) = 1.0;
    }
  return solve_lp(lp);
}

inline std::optional<RVector> clip_to_state(const RVector& r, const HermitianBasis& basis) {
  const int d = basis.dim();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(unembed_matrix(r, basis));
  RVector ev = es.eigenvalues().cwiseMax(0.0);
  const double tr = ev.sum();
  if (!(tr > 0.0)) return std::nullopt;
  ev /= tr;
  CMatrix rho = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  rho = (1.0 - 1e-9) * rho + 1e-9 * CMatrix::Identity(d, d) / static_cast<double>(d);
  return embed_matrix(rho, basis).coords;
}

}  // namespace detail

/// A state strictly inside the region: the maximally mixed state when the
/// facets admit it, else the Chebyshev centre of the facets (as is, or clipped
/// to the state body), else the Chebyshev centre of the facets refined by
/// supporting cuts of the state body until it lands inside.
inline DensityMatrix interior_point(const ConfidencePolytope& poly) {
  const HermitianBasis& basis = poly.basis();
  const auto dim = static_cast<Eigen::Index>(poly.ambient_dim());
  auto [a, b] = poly.constraints();
  auto strictly_inside = [&](const RVector& r) {
    return (a.rows() == 0 || (a * r - b).maxCoeff() < 0.0) && is_positive_definite(unembed_matrix(r, basis));
  };
  auto accept = [&](const RVector& r) {
    return DensityMatrix(unembed_matrix(r, basis), DensityMatrix::Check::full);
  };

  const RVector origin = RVector::Zero(dim);
  if (strictly_inside(origin)) return DensityMatrix::maximally_mixed(poly.dim());

  // Supporting cuts of the state body: v^dag rho(r) v >= 0 is linear in r.
  RMatrix cuts(0, dim);
  RVector cut_b(0);
  const double c = embedding_scale(poly.dim());
  for (int round = 0; round < 400; ++round) {
    RMatrix all(a.rows() + cuts.rows(), dim);
    RVector rhs(a.rows() + cuts.rows());
    all << a, cuts;
    rhs << b, cut_b;
    const LpResult res = detail::chebyshev_lp(all, rhs, true);
    if (res.status == LpStatus::infeasible) break;
    if (res.status != LpStatus::optimal) throw Error(ErrorKind::NumericalFailure, "interior-point LP failed");
    const RVector center = res.x.head(dim);
    if (strictly_inside(center)) return accept(center);
    if (round == 0) {
      if (auto clipped = detail::clip_to_state(center, basis); clipped && strictly_inside(*clipped))
        return accept(*clipped);
    }
    if (res.x(dim) <= 0.0) {
      const DensityMatrix trial(unembed_matrix(center, basis), DensityMatrix::Check::skip_psd);
      if (trial.is_psd() && poly.facets_contain(center)) return trial;
      break;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(unembed_matrix(center, basis));
    const CVector v = es.eigenvectors().col(0);
    RVector row(dim);
    for (Eigen::Index j = 0; j < dim; ++j)
      row(j) = -(v.adjoint() * basis[static_cast<std::size_t>(j)] * v)(0, 0).real();
    cuts.conservativeResize(cuts.rows() + 1, Eigen::NoChange);
    cuts.row(cuts.rows() - 1) = row.transpose();
    cut_b.conservativeResize(cut_b.size() + 1);
    cut_b(cut_b.size() - 1) = 1.0 / c;
  }
  throw Error(ErrorKind::EmptyRegion, "no state satisfies every facet");
}

struct SamplerOptions {
  std::size_t count = 10000;
  RngSeed seed{};
  std::size_t burn_in = 1000;
  std::size_t thinning = 10;
  std::size_t chains = 1;
  unsigned threads = 1;
};

struct SampleSet {
  std::vector<DensityMatrix> states;
  std::vector<RVector> points;  // Bloch coordinates of `states`
  RngSeed seed{};
  std::size_t burn_in = 0;
  std::size_t thinning = 0;
  std::size_t chain_count = 0;
};

namespace detail {

// Largest t in [0, t_max] (t_max > 0) with rho + t U positive, assuming t=0 is.
inline double psd_extent(const CMatrix& rho, const CMatrix& dir, double t_max) {
  if (psd_for_sampling(rho + t_max * dir)) return t_max;
  double lo = 0.0, hi = t_max;
  for (int it = 0; it < 64 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (psd_for_sampling(rho + mid * dir))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

inline std::vector<RVector> run_chain(const ConfidencePolytope& poly, const RVector& start, std::size_t count,
                                      RngSeed seed, std::size_t burn_in, std::size_t thinning) {
  constexpr int kMaxStalls = 100;
  const HermitianBasis& basis = poly.basis();
  const auto dim = static_cast<Eigen::Index>(poly.ambient_dim());
  auto [a, b] = poly.constraints();
  Rng rng(seed);
  RVector x = start;
  CMatrix rho = unembed_matrix(x, basis);
  std::vector<RVector> out;
  out.reserve(count);
  int stalls = 0;
  const std::size_t steps = burn_in + count * thinning;
  RVector u(dim);
  for (std::size_t step = 1; step <= steps; ++step) {
    for (Eigen::Index j = 0; j < dim; ++j) u(j) = rng.normal();
    u.normalize();
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    if (a.rows() > 0) {
      const RVector au = a * u;
      const RVector slack = b - a * x;
      for (Eigen::Index i = 0; i < au.size(); ++i) {
        if (au(i) > 0.0)
          hi = std::min(hi, slack(i) / au(i));
        else if (au(i) < 0.0)
          lo = std::max(lo, slack(i) / au(i));
      }
    }
    // the state body lies inside the unit ball
    const double xu = x.dot(u);
    const double disc = std::sqrt(std::max(0.0, xu * xu - x.squaredNorm() + 1.0));
    hi = std::min(hi, std::max(0.0, -xu + disc));
    lo = std::max(lo, std::min(0.0, -xu - disc));

    const CMatrix dir = direction_matrix(u, basis);
    if (hi > 0.0) hi = psd_extent(rho, dir, hi);
    if (lo < 0.0) lo = -psd_extent(rho, -dir, -lo);

    if (hi - lo < 1e-14) {
      if (++stalls >= kMaxStalls) throw Error(ErrorKind::ChainStall, "hit-and-run chords keep collapsing");
    } else {
      stalls = 0;
      const double t = lo + rng.uniform() * (hi - lo);
      x += t * u;
      rho += t * dir;
    }
    if (step > burn_in && (step - burn_in) % thinning == 0) out.push_back(x);
  }
  return out;
}

}  // namespace detail

/// Hit-and-run over facets ∩ state body in Bloch coordinates. Chords are cut
/// analytically against facets and the unit ball, and by bisection against
/// positivity. Chains start from interior_point and use seed.derive(chain).
inline SampleSet hit_and_run_sample(const ConfidencePolytope& poly, const SamplerOptions& opts) {
  if (opts.thinning == 0 || opts.chains == 0) throw Error(ErrorKind::DomainError, "thinning and chains must be >= 1");
  const DensityMatrix start = interior_point(poly);
  const RVector x0 = embed_state(start, poly.basis()).coords;

  std::vector<std::vector<RVector>> per_chain(opts.chains);
  parallel_for(opts.chains, opts.threads, [&](std::size_t c) {
    const std::size_t share = opts.count / opts.chains + (c < opts.count % opts.chains ? 1 : 0);
    per_chain[c] = detail::run_chain(poly, x0, share, opts.seed.derive(c), opts.burn_in, opts.thinning);
  });

  SampleSet set;
  set.seed = opts.seed;
  set.burn_in = opts.burn_in;
  set.thinning = opts.thinning;
  set.chain_count = opts.chains;
  set.points.reserve(opts.count);
  set.states.reserve(opts.count);
  for (auto& chain : per_chain)
    for (auto& x : chain) {
      set.states.emplace_back(unembed_matrix(x, poly.basis()), DensityMatrix::Check::skip_psd);
      set.points.push_back(std::move(x));
    }
  return set;
}

struct BoundingBox {
  std::vector<double> lo;
  std::vector<double> hi;
  std::size_t longest_axis = 0;  // suggested direction for further measurements

  double edge(std::size_t j) const { return hi[j] - lo[j]; }
  bool contains(const RVector& r, double slack = 1e-9) const {
    for (std::size_t j = 0; j < lo.size(); ++j) {
      const double v = r(static_cast<Eigen::Index>(j));
      if (v < lo[j] - slack || v > hi[j] + slack) return false;
    }
    return true;
  }
};

/// Per-axis extremes of the facet system (the state body is ignored, so the
/// box is an outer bound of the confidence region).
inline BoundingBox bounding_box(const ConfidencePolytope& poly) {
  const auto dim = static_cast<Eigen::Index>(poly.ambient_dim());
  LinearProgram lp;
  std::tie(lp.a, lp.b) = poly.constraints();
  BoundingBox box;
  box.lo.resize(static_cast<std::size_t>(dim));
  box.hi.resize(static_cast<std::size_t>(dim));
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (double sign : {1.0, -1.0}) {
      lp.objective = RVector::Zero(dim);
      lp.objective(j) = sign;
      const LpResult res = solve_lp(lp);
      switch (res.status) {
        case LpStatus::infeasible:
          throw Error(ErrorKind::EmptyRegion, "facet system is infeasible");
        case LpStatus::unbounded:
          throw Error(ErrorKind::UnboundedAxis, "facet system is unbounded along an axis", static_cast<std::size_t>(j));
        case LpStatus::numerical_failure:
          throw Error(ErrorKind::NumericalFailure, "bounding-box LP failed its certificate check");
        case LpStatus::optimal:
          break;
      }
      if (sign > 0)
        box.hi[static_cast<std::size_t>(j)] = res.value;
      else
        box.lo[static_cast<std::size_t>(j)] = -res.value;
    }
  }
  for (std::size_t j = 1; j < box.lo.size(); ++j)
    if (box.edge(j) > box.edge(box.longest_axis)) box.longest_axis = j;
  return box;
}

struct ChebyshevBall {
  BlochVector center;
  double radius = 0.0;
};

/// Largest ball inscribed in the facet system (state body ignored).
inline ChebyshevBall chebyshev_center(const ConfidencePolytope& poly) {
  const auto needed = static_cast<std::size_t>(poly.dim()) * static_cast<std::size_t>(poly.dim());
  if (poly.facets().size() < needed)
    throw Error(ErrorKind::DomainError, "Chebyshev ball needs at least d^2 facets");
  auto [a, b] = poly.constraints();
  const LpResult res = detail::chebyshev_lp(a, b, false);
  if (res.status == LpStatus::infeasible) throw Error(ErrorKind::EmptyRegion, "facet system is infeasible");
  if (res.status == LpStatus::unbounded) {
    bounding_box(poly);  // throws UnboundedAxis with the offending axis
    throw Error(ErrorKind::UnboundedAxis, "facet system is unbounded");
  }
  if (res.status != LpStatus::optimal)
    throw Error(ErrorKind::NumericalFailure, "Chebyshev LP failed its certificate check");
  const auto dim = a.cols();
  return {{poly.dim(), res.x.head(dim)}, res.x(dim)};
}

}  // namespace qpoly

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "qpoly/geometry.hpp"
#include "qpoly/simulation.hpp"

using namespace qpoly;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no qpoly::Error thrown";
  return ErrorKind::NumericalFailure;
}

/// Box |x_j - center_j| <= half_j as a qubit polytope.
ConfidencePolytope box_polytope(const Eigen::Vector3d& center, const Eigen::Vector3d& half) {
  std::vector<Facet> facets;
  for (int j = 0; j < 3; ++j)
    for (double s : {1.0, -1.0}) {
      Facet f;
      f.normal = RVector::Zero(3);
      f.normal(j) = s;
      f.offset = s * center(j) + half(j);
      f.eps_i = 0.001;
      facets.push_back(f);
    }
  return ConfidencePolytope(gellmann_basis(2), facets, 0.0);
}

// Maximum of c.x over {A x <= b} by enumerating every vertex (n-subsets of
// constraints); assumes the LP is bounded.
std::optional<double> brute_force_lp(const RMatrix& a, const RVector& b, const RVector& c) {
  const auto m = a.rows(), n = a.cols();
  std::optional<double> best;
  std::vector<int> pick(static_cast<std::size_t>(m), 0);
  std::fill(pick.end() - n, pick.end(), 1);
  do {
    RMatrix sub(n, n);
    RVector rhs(n);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m; ++i)
      if (pick[static_cast<std::size_t>(i)]) {
        sub.row(k) = a.row(i);
        rhs(k++) = b(i);
      }
    Eigen::FullPivLU<RMatrix> lu(sub);
    if (!lu.isInvertible()) continue;
    const RVector x = lu.solve(rhs);
    if ((a * x - b).maxCoeff() > 1e-9) continue;
    const double v = c.dot(x);
    if (!best || v > *best) best = v;
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace

TEST(Lp, TextbookCases) {
  LinearProgram one{RVector::Ones(1), RMatrix(2, 1), RVector(2)};
  one.a << 1, -1;
  one.b << 3, 0;
  auto r = solve_lp(one);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.x(0), 3.0, 1e-12);

  LinearProgram box{RVector::Ones(2), RMatrix(4, 2), RVector::Ones(4)};
  box.a << 1, 0, -1, 0, 0, 1, 0, -1;
  r = solve_lp(box);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.value, 2.0, 1e-12);
  EXPECT_NEAR(r.x(0), 1.0, 1e-12);
  EXPECT_NEAR(r.x(1), 1.0, 1e-12);
  EXPECT_LE(r.certificate_error, 1e-12);

  LinearProgram bad{RVector::Ones(1), RMatrix(2, 1), RVector(2)};
  bad.a << 1, -1;
  bad.b << -1, 0;
  EXPECT_EQ(solve_lp(bad).status, LpStatus::infeasible);

  LinearProgram open{RVector::Ones(1), RMatrix(1, 1), RVector(1)};
  open.a << -1;
  open.b << 0;
  EXPECT_EQ(solve_lp(open).status, LpStatus::unbounded);
}

TEST(Lp, MatchesVertexEnumeration) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index n = 2 + t % 2;
    const Eigen::Index m = 6 + t % 4;
    RMatrix a(m + 2 * n, n);
    RVector b(m + 2 * n);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = nd(gen);
      b(i) = std::abs(nd(gen)) + 0.1;
    }
    // bounding box keeps the LP bounded
    for (Eigen::Index j = 0; j < n; ++j) {
      a.row(m + 2 * j) = RVector::Unit(n, j).transpose();
      a.row(m + 2 * j + 1) = -RVector::Unit(n, j).transpose();
      b(m + 2 * j) = b(m + 2 * j + 1) = 3.0;
    }
    RVector c(n);
    for (Eigen::Index j = 0; j < n; ++j) c(j) = nd(gen);
    const auto res = solve_lp({c, a, b});
    ASSERT_EQ(res.status, LpStatus::optimal);
    const auto ref = brute_force_lp(a, b, c);
    ASSERT_TRUE(ref.has_value());
    EXPECT_NEAR(res.value, *ref, 1e-9);
    // dual certificate
    EXPECT_GE(res.dual.minCoeff(), -1e-9);
    EXPECT_LT((a.transpose() * res.dual - c).cwiseAbs().maxCoeff(), 1e-8);
    // small objective perturbation moves the optimum by O(perturbation)
    RVector c2 = c;
    c2(0) += 1e-7;
    EXPECT_NEAR(solve_lp({c2, a, b}).value, res.value, 1e-6);
  }
}

TEST(InteriorPoint, MixedStateForCentredData) {
  const auto poly = build_polytope(sic_qubit(), CountVector({260, 240, 255, 245}), 0.05);
  const auto rho = interior_point(poly);
  EXPECT_LT((rho.matrix() - CMatrix::Identity(2, 2) / 2.0).norm(), 1e-15);
}

TEST(InteriorPoint, HuggingTheBoundary) {
  for (int d = 2; d <= 3; ++d) {
    CVector psi = CVector::Zero(d);
    psi(0) = 1.0;
    const auto povm = d == 2 ? sic_qubit() : mub_prime(3);
    const auto counts = sample_counts(DensityMatrix::pure(psi), povm, 100000, RngSeed{3});
    const auto poly = build_polytope(povm, counts, 0.01);
    const auto rho = interior_point(poly);
    EXPECT_TRUE(contains(poly, rho));
    EXPECT_GT(rho.purity(), 0.9);
  }
}

TEST(InteriorPoint, ImpossibleFacetsAreEmpty) {
  const auto povm = sic_qubit();
  std::vector<Facet> facets;
  for (std::size_t i = 0; i < povm.size(); ++i) {
    Facet f;
    f.normal = povm.eta(i);  // (d-1) eta with d = 2
    f.offset = -1.0;         // tr(E_i sigma) <= 0
    f.eps_i = 0.001;
    facets.push_back(f);
  }
  const ConfidencePolytope poly(povm.basis(), facets, 0.0);
  EXPECT_EQ(kind_of([&] { interior_point(poly); }), ErrorKind::EmptyRegion);
}

TEST(BoundingBox, MubReproducesOffsets) {
  const auto povm = mub_qubit();
  const auto counts = sample_counts(bloch_qubit(0.1, 0.2, -0.3), povm, 3000, RngSeed{8});
  const auto poly = build_polytope(povm, counts, 0.01);
  const auto box = bounding_box(poly);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(box.hi[j], poly.facets()[2 * j].offset, 1e-12);
    EXPECT_NEAR(box.lo[j], -poly.facets()[2 * j + 1].offset, 1e-12);
  }
}

TEST(BoundingBox, NonIcPovmIsUnboundedAlongZ) {
  const auto p = pauli_matrices();
  const std::vector<CMatrix> el = {0.25 * (p[0] + p[1]), 0.25 * (p[0] - p[1]), 0.25 * (p[0] + p[2]),
                                   0.25 * (p[0] - p[2])};
  const auto povm = embed_povm(el, gellmann_basis(2));
  const auto poly = build_polytope(povm, CountVector({30, 20, 25, 25}), 0.05);
  try {
    bounding_box(poly);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnboundedAxis);
    EXPECT_EQ(e.index().value(), 2u);
  }
}

TEST(BoundingBox, EdgesShrinkWithData) {
  const auto povm = sic_qubit();
  const auto rho = bloch_qubit(0.2, 0.1, 0.4);
  std::vector<double> small, large;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto a = bounding_box(build_polytope(povm, sample_counts(rho, povm, 1000, RngSeed{r}), 0.01));
    const auto b = bounding_box(build_polytope(povm, sample_counts(rho, povm, 100000, RngSeed{r + 100}), 0.01));
    small.push_back(a.edge(0) + a.edge(1) + a.edge(2));
    large.push_back(b.edge(0) + b.edge(1) + b.edge(2));
  }
  std::nth_element(small.begin(), small.begin() + 10, small.end());
  std::nth_element(large.begin(), large.begin() + 10, large.end());
  EXPECT_LT(large[10], small[10]);
}

TEST(Chebyshev, CenteredBox) {
  const auto poly = box_polytope(Eigen::Vector3d::Zero(), Eigen::Vector3d::Constant(0.3));
  const auto ball = chebyshev_center(poly);
  EXPECT_LT(ball.center.coords.norm(), 1e-12);
  EXPECT_NEAR(ball.radius, 0.3, 1e-12);
}

TEST(Chebyshev, SymmetricSicAtOriginAndStrictlyFeasible) {
  const auto poly = build_polytope(sic_qubit(), CountVector({250, 250, 250, 250}), 0.01);
  const auto ball = chebyshev_center(poly);
  EXPECT_LT(ball.center.coords.norm(), 1e-10);
  EXPECT_GT(ball.radius, 0.0);
  const auto asym = build_polytope(sic_qubit(), CountVector({400, 200, 250, 150}), 0.01);
  const auto b2 = chebyshev_center(asym);
  for (const auto& f : asym.facets())
    EXPECT_LE(f.normal.dot(b2.center.coords) + b2.radius * f.normal.norm(), f.offset + 1e-9);
}

TEST(Chebyshev, NeedsEnoughFacets) {
  const auto poly = build_polytope(axis_povm(2), CountVector({10, 5}), 0.1);
  EXPECT_EQ(kind_of([&] { chebyshev_center(poly); }), ErrorKind::DomainError);
}

TEST(Sampler, BoxMeansMatchCentre) {
  const Eigen::Vector3d c(0.1, -0.2, 0.15), h(0.2, 0.1, 0.3);
  const auto poly = box_polytope(c, h);
  SamplerOptions o;
  o.count = 4000;
  o.seed = RngSeed{77};
  o.thinning = 20;
  const auto s = hit_and_run_sample(poly, o);
  ASSERT_EQ(s.points.size(), 4000u);
  for (int j = 0; j < 3; ++j) {
    double mean = 0.0;
    for (const auto& p : s.points) mean += p(j);
    mean /= static_cast<double>(s.points.size());
    const double se = 2 * h(j) / std::sqrt(12.0 * static_cast<double>(s.points.size()));
    EXPECT_LT(std::abs(mean - c(j)), 4 * se) << j;
  }
}

TEST(Sampler, MembershipDeterminismAndBox) {
  const auto povm = mub_prime(3);
  const auto counts = sample_counts(random_state_hs(3, RngSeed{4}), povm, 2000, RngSeed{5});
  const auto poly = build_polytope(povm, counts, 0.05);
  SamplerOptions o;
  o.count = 300;
  o.seed = RngSeed{9};
  o.chains = 3;
  o.burn_in = 200;
  const auto s1 = hit_and_run_sample(poly, o);
  o.threads = 3;
  const auto s2 = hit_and_run_sample(poly, o);
  ASSERT_EQ(s1.points.size(), 300u);
  const auto box = bounding_box(poly);
  for (std::size_t i = 0; i < s1.points.size(); ++i) {
    EXPECT_EQ(s1.points[i], s2.points[i]);
    EXPECT_TRUE(poly.facets_contain(s1.points[i], 1e-10));
    EXPECT_GE(s1.states[i].min_eigenvalue(), -1e-9);
    EXPECT_TRUE(box.contains(s1.points[i]));
    for (const auto& f : poly.facets()) EXPECT_LE(f.normal.dot(s1.points[i]), f.offset + 1e-10);
  }
}

TEST(Sampler, ZeroWidthRegionStalls) {
  const auto poly = box_polytope(Eigen::Vector3d(0.1, 0.1, 0.1), Eigen::Vector3d::Zero());
  SamplerOptions o;
  o.count = 10;
  EXPECT_THROW(
      {
        try {
          hit_and_run_sample(poly, o);
        } catch (const Error& e) {
          EXPECT_TRUE(e.kind() == ErrorKind::ChainStall || e.kind() == ErrorKind::EmptyRegion);
          throw;
        }
      },
      Error);
}

#include <gtest/gtest.h>

#include <random>

#include "qpoly/figures_of_merit.hpp"
#include "qpoly/simulation.hpp"
#include "test_support.hpp"

using namespace qpoly;

namespace {

CVector ket(std::initializer_list<Complex> v) {
  CVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (auto x : v) out(i++) = x;
  return out.normalized();
}

// Two-qubit partial transpose on the second factor by transposing each 2x2 block.
CMatrix block_transpose(const CMatrix& rho) {
  CMatrix out(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block(2 * i, 2 * j, 2, 2) = rho.block(2 * i, 2 * j, 2, 2).transpose();
  return out;
}

}  // namespace

TEST(Fidelity, Examples) {
  std::mt19937_64 gen(1);
  const DensityMatrix rho(qtest::random_density(3, gen));
  EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-10);
  EXPECT_NEAR(fidelity(DensityMatrix::pure(ket({1, 0})), DensityMatrix::pure(ket({1, 1}))), 0.5, 1e-15);
  EXPECT_NEAR(fidelity(mixed_state(4), bell_state()), 0.25, 1e-15);
  EXPECT_THROW(fidelity(mixed_state(2), mixed_state(3)), Error);
}

TEST(Fidelity, SymmetricOnMixedStates) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 50; ++t) {
    const DensityMatrix a(qtest::random_density(3, gen)), b(qtest::random_density(3, gen));
    EXPECT_NEAR(fidelity(a, b), fidelity(b, a), 1e-10);
    EXPECT_LT(fidelity(a, b), 1.0);
  }
}

TEST(TraceDistance, ExamplesAndFuchsVanDeGraaf) {
  std::mt19937_64 gen(3);
  const DensityMatrix rho(qtest::random_density(2, gen));
  EXPECT_NEAR(trace_distance(rho, rho), 0.0, 1e-15);
  EXPECT_NEAR(trace_distance(DensityMatrix::pure(ket({1, 0})), DensityMatrix::pure(ket({0, 1}))), 1.0, 1e-15);
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + t % 3;
    const DensityMatrix a(qtest::random_density(d, gen, 1 + t % d)), b(qtest::random_density(d, gen));
    const double f = fidelity(a, b), tdist = trace_distance(a, b);
    EXPECT_GE(tdist, 1.0 - std::sqrt(f) - 1e-10);
    EXPECT_LE(tdist, std::sqrt(1.0 - f) + 1e-10);
    const DensityMatrix c(qtest::random_density(d, gen));
    EXPECT_LE(tdist, trace_distance(a, c) + trace_distance(c, b) + 1e-10);
  }
}

TEST(Negativity, BellAndProducts) {
  EXPECT_NEAR(negativity(bell_state(), {2, 2}, 1), 0.5, 1e-12);
  std::mt19937_64 gen(4);
  for (int t = 0; t < 20; ++t) {
    const DensityMatrix p(kron(qtest::random_density(2, gen), qtest::random_density(3, gen)));
    EXPECT_NEAR(negativity(p, {2, 3}, 1), 0.0, 1e-12);
  }
}

TEST(Negativity, DepolarisedBellAgainstEigenOracle) {
  for (double p : {0.0, 0.3, 0.5, 0.8}) {
    const auto rho = noisy_bell(p);
    const RVector ev = hermitian_eigenvalues(block_transpose(rho.matrix()));
    double neg = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) neg += std::max(0.0, -ev(i));
    EXPECT_NEAR(negativity(rho, {2, 2}, 1), neg, 1e-12);
  }
  EXPECT_NEAR(negativity(noisy_bell(0.5), {2, 2}, 1), 0.125, 1e-12);
}

TEST(Negativity, LocalUnitaryInvariance) {
  std::mt19937_64 gen(6);
  for (int t = 0; t < 20; ++t) {
    const DensityMatrix rho(qtest::random_density(4, gen));
    const CMatrix u = kron(qtest::random_unitary(2, gen), qtest::random_unitary(2, gen));
    const DensityMatrix rotated(u * rho.matrix() * u.adjoint());
    EXPECT_NEAR(negativity(rho, {2, 2}, 1), negativity(rotated, {2, 2}, 1), 1e-10);
  }
}

TEST(Negativity, BadBipartition) {
  EXPECT_THROW(negativity(bell_state(), {2, 3}, 1), Error);
  EXPECT_THROW(negativity(bell_state(), {4}, 1), Error);
  EXPECT_THROW(negativity(bell_state(), {2, 2}, 2), Error);
}

TEST(Mle, UniformSicCountsGiveMixedState) {
  const auto res = mle_estimate(sic_qubit(), CountVector({250, 250, 250, 250}));
  EXPECT_LT((res.state.matrix() - CMatrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_TRUE(res.informationally_complete);
}

TEST(Mle, MonotoneAndStationary) {
  const auto povm = mub_prime(3);
  const DensityMatrix truth(0.8 * random_state_hs(3, RngSeed{1}).matrix() + 0.2 * CMatrix::Identity(3, 3) / 3.0);
  const auto counts = sample_counts(truth, povm, 5000, RngSeed{2});
  MleOptions o;
  o.record_trace = true;
  const auto res = mle_estimate(povm, counts, o);
  ASSERT_FALSE(res.trace.empty());
  for (std::size_t i = 1; i < res.trace.size(); ++i) EXPECT_GE(res.trace[i], res.trace[i - 1]);
  EXPECT_NEAR(res.state.matrix().trace().real(), 1.0, 1e-12);
  EXPECT_GE(res.state.min_eigenvalue(), -1e-12);
  const CMatrix r = likelihood_operator(povm, counts, res.state.matrix());
  EXPECT_LT((r * res.state.matrix() - res.state.matrix()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(res.log_likelihood, log_likelihood(povm, counts, res.state.matrix()), 1e-9);
}

TEST(Mle, RankDeficientDataStaysPsd) {
  const auto res = mle_estimate(mub_qubit(), CountVector({100, 0, 50, 50, 50, 50}));
  EXPECT_GE(res.state.min_eigenvalue(), -1e-12);
  EXPECT_NEAR(res.state.matrix().trace().real(), 1.0, 1e-12);
  EXPECT_FALSE(is_informationally_complete(axis_povm(0)));
}

TEST(FomInterval, PinnedRegion) {
  const auto target = bloch_qubit(0.3, -0.1, 0.4);
  const RVector r = embed_state(target, gellmann_basis(2)).coords;
  std::vector<Facet> facets;
  for (int j = 0; j < 3; ++j)
    for (double s : {1.0, -1.0}) {
      Facet f;
      f.normal = RVector::Zero(3);
      f.normal(j) = s;
      f.offset = s * r(j) + 1e-9;
      facets.push_back(f);
    }
  const ConfidencePolytope poly(gellmann_basis(2), facets, 0.0);
  FomSpec spec;
  spec.kind = FomKind::trace_distance;
  spec.reference = mixed_state(2);
  SamplerOptions o;
  o.count = 200;
  const auto iv = fom_interval(poly, spec, o);
  const double v = trace_distance(target, mixed_state(2));
  EXPECT_NEAR(iv.lower, v, 1e-8);
  EXPECT_NEAR(iv.upper, v, 1e-8);
}

TEST(FomInterval, NoisyBellFidelity) {
  const auto povm = tensor_povm({sic_qubit(), sic_qubit()});
  const auto truth = noisy_bell(0.1);
  const auto counts = sample_counts(truth, povm, 10000, RngSeed{21});
  const auto poly = build_polytope(povm, counts, 0.001);
  ASSERT_TRUE(contains(poly, truth));
  FomSpec spec;
  spec.kind = FomKind::fidelity;
  spec.reference = bell_state();
  SamplerOptions o;
  o.count = 4000;
  o.seed = RngSeed{1};
  const auto a = fom_interval(poly, spec, o);
  const double v = fidelity(truth, bell_state());
  EXPECT_GT(a.lower, 0.0);
  EXPECT_LT(a.upper, 1.0);
  EXPECT_LE(a.lower, v);
  EXPECT_GE(a.upper, v);
  // Sample extremes converge slowly in 15 dimensions; seeds differ by a few
  // hundredths here. The tight resampling check is on the qubit case below.
  o.seed = RngSeed{2};
  const auto b = fom_interval(poly, spec, o);
  EXPECT_NEAR(a.lower, b.lower, 0.05);
  EXPECT_NEAR(a.upper, b.upper, 0.05);
}

TEST(FomInterval, QubitResamplingStable) {
  const auto povm = sic_qubit();
  const auto truth = bloch_qubit(0.2, 0.1, 0.6);
  const auto poly = build_polytope(povm, sample_counts(truth, povm, 2000, RngSeed{3}), 0.01);
  FomSpec spec;
  spec.kind = FomKind::fidelity;
  spec.reference = bloch_qubit(0, 0, 1);
  SamplerOptions o;
  o.count = 4000;
  o.seed = RngSeed{1};
  const auto a = fom_interval(poly, spec, o);
  o.seed = RngSeed{2};
  const auto b = fom_interval(poly, spec, o);
  const double v = fidelity(truth, bloch_qubit(0, 0, 1));
  EXPECT_LE(a.lower, v);
  EXPECT_GE(a.upper, v);
  EXPECT_NEAR(a.lower, b.lower, 0.01);
  EXPECT_NEAR(a.upper, b.upper, 0.01);
}

TEST(FomInterval, NegativityNeedsBipartition) {
  const auto poly = build_polytope(tensor_povm({sic_qubit(), sic_qubit()}), CountVector(std::vector<std::int64_t>(16, 10)), 0.1);
  FomSpec spec;
  spec.kind = FomKind::negativity;
  SamplerOptions o;
  o.count = 10;
  EXPECT_THROW(fom_interval(poly, spec, o), Error);
}

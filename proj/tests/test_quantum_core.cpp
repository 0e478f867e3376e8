#include <gtest/gtest.h>

#include "qpoly/simulation.hpp"
#include "test_support.hpp"

using namespace qpoly;

namespace {

RMatrix gram(const HermitianBasis& b) {
  const auto n = static_cast<Eigen::Index>(b.size());
  RMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      // brute-force elementwise trace of the product, independent of trace_product
      Complex acc = 0;
      const auto& a = b[static_cast<std::size_t>(i)];
      const auto& c = b[static_cast<std::size_t>(j)];
      for (int r = 0; r < b.dim(); ++r)
        for (int k = 0; k < b.dim(); ++k) acc += a(r, k) * c(k, r);
      g(i, j) = acc.real();
    }
  return g;
}

}  // namespace

TEST(GellMann, QubitIsPauliXYZ) {
  const auto b = gellmann_basis(2);
  const auto p = pauli_matrices();
  ASSERT_EQ(b.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_LT((b[k] - p[k + 1]).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((gram(b) - 2.0 * RMatrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GellMann, GramIsTwiceIdentityUpToSix) {
  for (int d = 2; d <= 6; ++d) {
    const auto b = gellmann_basis(d);
    const auto n = static_cast<Eigen::Index>(d * d - 1);
    ASSERT_EQ(b.size(), static_cast<std::size_t>(n));
    EXPECT_LT((gram(b) - 2.0 * RMatrix::Identity(n, n)).cwiseAbs().maxCoeff(), d == 3 ? 1e-12 : 1e-10) << d;
    for (const auto& m : b.elements()) {
      EXPECT_LT(std::abs(m.trace()), 1e-14);
      EXPECT_TRUE(is_hermitian(m));
    }
  }
}

TEST(GellMann, DimensionOneRejected) {
  try {
    gellmann_basis(1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidDimension);
  }
}

TEST(Embedding, MixedStateAtOrigin) {
  for (int d = 2; d <= 5; ++d) {
    const auto r = embed_state(DensityMatrix::maximally_mixed(d), gellmann_basis(d));
    EXPECT_LT(r.coords.norm(), 1e-15);
  }
}

TEST(Embedding, ZeroKetIsNorthPole) {
  CVector psi = CVector::Zero(2);
  psi(0) = 1;
  const auto r = embed_state(DensityMatrix::pure(psi), gellmann_basis(2));
  EXPECT_NEAR(r.coords(0), 0, 1e-15);
  EXPECT_NEAR(r.coords(1), 0, 1e-15);
  EXPECT_NEAR(r.coords(2), 1, 1e-15);
}

TEST(Embedding, PureStatesOnUnitSphere) {
  std::mt19937_64 gen(11);
  for (int d = 2; d <= 5; ++d) {
    const auto b = gellmann_basis(d);
    for (int t = 0; t < 20; ++t) {
      const CMatrix rho = qtest::random_density(d, gen, 1);
      EXPECT_NEAR(embed_matrix(rho, b).coords.norm(), 1.0, 1e-12);
      const CMatrix mixed = qtest::random_density(d, gen);
      EXPECT_LT(embed_matrix(mixed, b).coords.norm(), 1.0);
    }
  }
}

TEST(Embedding, RoundTrip) {
  std::mt19937_64 gen(5);
  for (int d = 2; d <= 6; ++d) {
    const auto b = gellmann_basis(d);
    for (int t = 0; t < 50; ++t) {
      const DensityMatrix rho(qtest::random_density(d, gen));
      const auto back = unembed_state(embed_state(rho, b), b);
      EXPECT_LT((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Embedding, UnembedOutsideBallIsNotPsd) {
  const auto b = gellmann_basis(2);
  EXPECT_LT((unembed_state({2, RVector::Zero(3)}, b).matrix() - CMatrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff(),
            1e-15);
  const auto m = unembed_matrix(Eigen::Vector3d(0, 0, 2), b);
  EXPECT_NEAR(m.trace().real(), 1.0, 1e-15);
  EXPECT_TRUE(is_hermitian(m));
  EXPECT_LT(min_eigenvalue(m), 0.0);
  EXPECT_THROW(DensityMatrix{m}, Error);
}

TEST(Povm, SicWeightsAndDirections) {
  const auto p = sic_qubit();
  RVector sum = RVector::Zero(3);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(p.weight(i), 4.0, 1e-14);
    EXPECT_NEAR(p.eta(i).norm(), 1.0, 1e-14);
    sum += p.eta(i);
  }
  EXPECT_LT(sum.norm(), 1e-14);
}

TEST(Povm, MubWeightsAndDirections) {
  const auto p = mub_qubit();
  ASSERT_EQ(p.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(p.weight(i), 6.0, 1e-14);
    RVector e = RVector::Zero(3);
    e(static_cast<Eigen::Index>(i / 2)) = i % 2 == 0 ? 1.0 : -1.0;
    EXPECT_LT((p.eta(i) - e).norm(), 1e-14);
  }
}

TEST(Povm, TrivialIdentityPovm) {
  const auto p = embed_povm({CMatrix::Identity(3, 3)}, gellmann_basis(3));
  EXPECT_NEAR(p.weight(0), 1.0, 1e-15);
  EXPECT_LT(p.eta(0).norm(), 1e-15);
}

TEST(Povm, RandomPovmsReconstructAndNormalise) {
  std::mt19937_64 gen(21);
  for (int d = 2; d <= 4; ++d) {
    const auto b = gellmann_basis(d);
    const double c = embedding_scale(d);
    for (int t = 0; t < 10; ++t) {
      const auto el = qtest::random_povm_elements(d, d * d + 1, gen);
      const auto p = embed_povm(el, b);
      double inv = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        inv += 1.0 / p.weight(i);
        // E_i = (1/m_i)(1 + c eta_i . lambda)
        CMatrix rec = CMatrix::Identity(d, d);
        for (std::size_t j = 0; j < b.size(); ++j) rec += c * p.eta(i)(static_cast<Eigen::Index>(j)) * b[j];
        rec /= p.weight(i);
        EXPECT_LT((rec - el[i]).cwiseAbs().maxCoeff(), 1e-10);
      }
      EXPECT_NEAR(inv, 1.0, 1e-10);
    }
  }
}

TEST(Povm, RejectsInvalidElements) {
  const auto b = gellmann_basis(2);
  auto sic = sic_qubit().elements();
  auto bad = sic;
  bad[0] *= 1.1;
  try {
    embed_povm(bad, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidPovm);
  }
  auto nonherm = sic;
  nonherm[1](0, 1) += Complex(0.1, 0);
  nonherm[2](0, 1) -= Complex(0.1, 0);
  try {
    embed_povm(nonherm, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidPovm);
    EXPECT_EQ(e.index().value(), 1u);
  }
  EXPECT_THROW(embed_povm({CMatrix::Identity(3, 3)}, b), Error);
}

TEST(Born, MixedStateGivesTraceOverD) {
  std::mt19937_64 gen(3);
  const auto el = qtest::random_povm_elements(3, 5, gen);
  for (const auto& e : el)
    EXPECT_NEAR(born_probability(DensityMatrix::maximally_mixed(3), e), e.trace().real() / 3.0, 1e-15);
}

TEST(Born, ZeroKetOnMubElement) {
  CVector psi = CVector::Zero(2);
  psi(0) = 1;
  EXPECT_NEAR(born_probability(DensityMatrix::pure(psi), mub_qubit().element(4)), 1.0 / 3.0, 1e-15);
}

TEST(Born, BlochFormAgreesAndSumsToOne) {
  std::mt19937_64 gen(8);
  for (int d = 2; d <= 4; ++d) {
    const auto b = gellmann_basis(d);
    for (int t = 0; t < 30; ++t) {
      const auto p = embed_povm(qtest::random_povm_elements(d, 7, gen), b);
      const DensityMatrix rho(qtest::random_density(d, gen));
      const RVector bloch = p.probabilities(embed_state(rho, b).coords);
      double total = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double born = born_probability(rho, p.element(i));
        EXPECT_NEAR(born, bloch(static_cast<Eigen::Index>(i)), 1e-12);
        total += born;
      }
      EXPECT_NEAR(total, 1.0, 1e-10);
    }
  }
}

TEST(DensityMatrixChecks, RejectsBadTraceAndHermiticity) {
  CMatrix m = CMatrix::Identity(2, 2);
  EXPECT_THROW(DensityMatrix{m}, Error);
  m = CMatrix::Identity(2, 2) / 2.0;
  m(0, 1) = Complex(0.1, 0);
  EXPECT_THROW(DensityMatrix{m}, Error);
}

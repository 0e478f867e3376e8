#pragma once

// Dense Hermitian algebra: density matrices, POVMs, a traceless orthogonal
// operator basis and the Euclidean (Bloch) embedding
//
//   rho = (1/d) (1 + c r.lambda),   E_i = (1/m_i) (1 + c eta_i.lambda),
//   c = sqrt(d(d-1)/2),  tr(lambda_i lambda_j) = 2 delta_ij,
//
// under which tr(E_i rho) = (1/m_i) (1 + (d-1) r.eta_i).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qpoly/error.hpp"

namespace qpoly {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

namespace tol {
inline constexpr double herm = 1e-9;
inline constexpr double trace = 1e-9;
inline constexpr double psd = 1e-9;
}  // namespace tol

/// tr(A B) without forming the product.
inline Complex trace_product(const CMatrix& a, const CMatrix& b) {
  return (a.transpose().array() * b.array()).sum();
}

inline bool is_hermitian(const CMatrix& m, double tolerance = tol::herm) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
}

inline RVector hermitian_eigenvalues(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_eigenvalue(const CMatrix& m) { return hermitian_eigenvalues(m).minCoeff(); }

/// Cholesky-based strict positivity test; much cheaper than an eigensolve.
inline bool is_positive_definite(const CMatrix& m) {
  Eigen::LLT<CMatrix> llt(m);
  return llt.info() == Eigen::Success;
}

/// Square-root of a Hermitian PSD matrix, negative eigenvalues clipped at 0.
inline CMatrix hermitian_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  RVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

inline double embedding_scale(int d) { return std::sqrt(d * (d - 1) / 2.0); }

/// d x d Hermitian trace-one matrix. Positivity is enforced by default; the
/// `skip_psd` mode exists for Bloch points outside the state body, whose
/// positivity the caller must test with `is_psd`.
class DensityMatrix {
 public:
  enum class Check { full, skip_psd };

  explicit DensityMatrix(CMatrix m, Check check = Check::full) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 2)
      throw Error(ErrorKind::InvalidDimension, "density matrix must be square with d >= 2");
    if (!is_hermitian(m_))
      throw Error(ErrorKind::InvalidState, "density matrix is not Hermitian");
    if (std::abs(m_.trace() - Complex(1.0)) > tol::trace)
      throw Error(ErrorKind::InvalidState, "density matrix trace differs from one");
    if (check == Check::full && qpoly::min_eigenvalue(m_) < -tol::psd)
      throw Error(ErrorKind::InvalidState, "density matrix has a negative eigenvalue");
  }

  static DensityMatrix maximally_mixed(int d) {
    if (d < 2) throw Error(ErrorKind::InvalidDimension, "d must be >= 2");
    return DensityMatrix(CMatrix::Identity(d, d) / static_cast<double>(d));
  }

  static DensityMatrix pure(const CVector& psi) {
    const double norm = psi.norm();
    if (norm == 0.0) throw Error(ErrorKind::InvalidState, "zero state vector");
    CVector v = psi / norm;
    return DensityMatrix(v * v.adjoint());
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  double min_eigenvalue() const { return qpoly::min_eigenvalue(m_); }
  bool is_psd(double tolerance = tol::psd) const { return min_eigenvalue() >= -tolerance; }
  double purity() const { return trace_product(m_, m_).real(); }

 private:
  CMatrix m_;
};

/// Ordered family of d^2-1 traceless Hermitian matrices with
/// tr(l_i l_j) = 2 delta_ij. Copies share the underlying storage.
class HermitianBasis {
 public:
  HermitianBasis(int d, std::vector<CMatrix> elements, std::string name)
      : data_(std::make_shared<Data>(Data{d, std::move(elements), std::move(name)})) {
    const auto& el = data_->elements;
    if (d < 2) throw Error(ErrorKind::InvalidDimension, "basis dimension must be >= 2");
    if (el.size() != static_cast<std::size_t>(d * d - 1))
      throw Error(ErrorKind::InvalidDimension, "basis must contain d^2-1 elements");
    for (std::size_t i = 0; i < el.size(); ++i) {
      if (el[i].rows() != d || el[i].cols() != d)
        throw Error(ErrorKind::DimensionMismatch, "basis element has wrong shape", i);
      if (!is_hermitian(el[i]) || std::abs(el[i].trace()) > 1e-9)
        throw Error(ErrorKind::InvalidDimension, "basis element not traceless Hermitian", i);
    }
    for (std::size_t i = 0; i < el.size(); ++i)
      for (std::size_t j = i; j < el.size(); ++j) {
        const double g = trace_product(el[i], el[j]).real();
        if (std::abs(g - (i == j ? 2.0 : 0.0)) > 1e-9)
          throw Error(ErrorKind::InvalidDimension, "basis violates tr(l_i l_j) = 2 delta_ij", i);
      }
  }

  int dim() const { return data_->d; }
  std::size_t size() const { return data_->elements.size(); }
  const CMatrix& operator[](std::size_t i) const { return data_->elements[i]; }
  const std::vector<CMatrix>& elements() const { return data_->elements; }
  const std::string& name() const { return data_->name; }

  bool same_as(const HermitianBasis& other) const {
    if (data_ == other.data_) return true;
    if (dim() != other.dim()) return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (((*this)[i] - other[i]).cwiseAbs().maxCoeff() > 1e-12) return false;
    return true;
  }

 private:
  struct Data {
    int d;
    std::vector<CMatrix> elements;
    std::string name;
  };
  std::shared_ptr<const Data> data_;
};

/// Generalised Gell-Mann matrices, ordered as: symmetric off-diagonal pairs
/// (j<k, row-major), antisymmetric pairs (same order), then the d-1 diagonal
/// matrices. For d=2 this is (X, Y, Z).
inline HermitianBasis gellmann_basis(int d) {
  if (d < 2) throw Error(ErrorKind::InvalidDimension, "gellmann_basis requires d >= 2");
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(d * d - 1));
  const Complex i1(0.0, 1.0);
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      CMatrix m = CMatrix::Zero(d, d);
      m(j, k) = 1.0;
      m(k, j) = 1.0;
      out.push_back(std::move(m));
    }
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      CMatrix m = CMatrix::Zero(d, d);
      m(j, k) = -i1;
      m(k, j) = i1;
      out.push_back(std::move(m));
    }
  for (int l = 1; l < d; ++l) {
    CMatrix m = CMatrix::Zero(d, d);
    const double s = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) m(j, j) = s;
    m(l, l) = -s * l;
    out.push_back(std::move(m));
  }
  return HermitianBasis(d, std::move(out), "gellmann");
}

inline std::vector<CMatrix> pauli_matrices() {
  const Complex i1(0.0, 1.0);
  CMatrix id = CMatrix::Identity(2, 2);
  CMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, -i1, i1, 0;
  z << 1, 0, 0, -1;
  return {id, x, y, z};
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Tensor products of Pauli matrices on `qubits` qubits (identity string
/// excluded), lexicographic in I<X<Y<Z with the first qubit most significant,
/// rescaled to tr(l_i l_j) = 2 delta_ij. Axes of this basis are directly
/// measurable Pauli observables.
inline HermitianBasis pauli_basis(int qubits) {
  if (qubits < 1 || qubits > 5) throw Error(ErrorKind::InvalidDimension, "pauli_basis supports 1..5 qubits");
  const auto p = pauli_matrices();
  const int d = 1 << qubits;
  const double scale = std::sqrt(2.0 / d);
  std::vector<CMatrix> out;
  int total = 1;
  for (int q = 0; q < qubits; ++q) total *= 4;
  for (int code = 1; code < total; ++code) {
    CMatrix m = CMatrix::Identity(1, 1);
    int rest = code;
    std::vector<int> digits(static_cast<std::size_t>(qubits));
    for (int q = qubits - 1; q >= 0; --q) {
      digits[static_cast<std::size_t>(q)] = rest % 4;
      rest /= 4;
    }
    for (int q = 0; q < qubits; ++q) m = kron(m, p[static_cast<std::size_t>(digits[static_cast<std::size_t>(q)])]);
    out.push_back(scale * m);
  }
  return HermitianBasis(d, std::move(out), "pauli");
}

struct BlochVector {
  int dim = 0;
  RVector coords;
};

inline BlochVector embed_matrix(const CMatrix& rho, const HermitianBasis& basis) {
  const int d = basis.dim();
  if (rho.rows() != d || rho.cols() != d)
    throw Error(ErrorKind::DimensionMismatch, "state and basis dimensions differ");
  const double f = d / (2.0 * embedding_scale(d));
  RVector r(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j)
    r(static_cast<Eigen::Index>(j)) = trace_product(rho, basis[j]).real() * f;
  return {d, std::move(r)};
}

inline BlochVector embed_state(const DensityMatrix& rho, const HermitianBasis& basis) {
  return embed_matrix(rho.matrix(), basis);
}

/// Hermitian, trace-one matrix for a Bloch point. Not necessarily PSD.
inline CMatrix unembed_matrix(const RVector& r, const HermitianBasis& basis) {
  const int d = basis.dim();
  if (static_cast<std::size_t>(r.size()) != basis.size())
    throw Error(ErrorKind::DimensionMismatch, "Bloch vector length must be d^2-1");
  CMatrix m = CMatrix::Zero(d, d);
  for (std::size_t j = 0; j < basis.size(); ++j) m += r(static_cast<Eigen::Index>(j)) * basis[j];
  m *= embedding_scale(d);
  m += CMatrix::Identity(d, d);
  return m / static_cast<double>(d);
}

inline DensityMatrix unembed_state(const BlochVector& r, const HermitianBasis& basis) {
  if (r.dim != basis.dim()) throw Error(ErrorKind::DimensionMismatch, "Bloch vector dimension differs from basis");
  return DensityMatrix(unembed_matrix(r.coords, basis), DensityMatrix::Check::skip_psd);
}

/// POVM with its Bloch parametrisation (m_i, eta_i). Build with embed_povm.
class Povm {
 public:
  int dim() const { return basis_.dim(); }
  std::size_t size() const { return elements_.size(); }
  const std::vector<CMatrix>& elements() const { return elements_; }
  const CMatrix& element(std::size_t i) const { return elements_[i]; }
  /// m_i = d / tr(E_i)
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  const RVector& eta(std::size_t i) const { return etas_[i]; }
  const std::vector<RVector>& etas() const { return etas_; }
  const HermitianBasis& basis() const { return basis_; }

  /// Born probabilities through the Bloch form (1/m_i)(1 + (d-1) r.eta_i).
  RVector probabilities(const RVector& r) const {
    RVector p(static_cast<Eigen::Index>(size()));
    const double dm1 = dim() - 1.0;
    for (std::size_t i = 0; i < size(); ++i)
      p(static_cast<Eigen::Index>(i)) = (1.0 + dm1 * etas_[i].dot(r)) / weights_[i];
    return p;
  }

 private:
  Povm(HermitianBasis basis) : basis_(std::move(basis)) {}
  friend Povm embed_povm(std::vector<CMatrix> elements, const HermitianBasis& basis);

  HermitianBasis basis_;
  std::vector<CMatrix> elements_;
  std::vector<double> weights_;
  std::vector<RVector> etas_;
};

inline Povm embed_povm(std::vector<CMatrix> elements, const HermitianBasis& basis) {
  const int d = basis.dim();
  if (elements.empty()) throw Error(ErrorKind::InvalidPovm, "POVM has no elements");
  CMatrix sum = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const CMatrix& e = elements[i];
    if (e.rows() != d || e.cols() != d)
      throw Error(ErrorKind::DimensionMismatch, "POVM element has wrong dimension", i);
    if (!is_hermitian(e)) throw Error(ErrorKind::InvalidPovm, "POVM element is not Hermitian", i);
    if (min_eigenvalue(e) < -tol::psd) throw Error(ErrorKind::InvalidPovm, "POVM element is not PSD", i);
    if (e.trace().real() < tol::trace)
      throw Error(ErrorKind::InvalidPovm, "POVM element has vanishing trace", i);
    sum += e;
  }
  if ((sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > tol::herm)
    throw Error(ErrorKind::InvalidPovm, "POVM elements do not sum to the identity");

  Povm povm(basis);
  const double denom = std::sqrt(2.0 * d * (d - 1));
  for (const auto& e : elements) {
    const double m = d / e.trace().real();
    RVector eta(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j)
      eta(static_cast<Eigen::Index>(j)) = m * trace_product(e, basis[j]).real() / denom;
    povm.weights_.push_back(m);
    povm.etas_.push_back(std::move(eta));
  }
  povm.elements_ = std::move(elements);
  return povm;
}

/// Observed outcome tallies n_i.
class CountVector {
 public:
  CountVector() = default;
  explicit CountVector(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {
    for (std::size_t i = 0; i < counts_.size(); ++i)
      if (counts_[i] < 0) throw Error(ErrorKind::DomainError, "negative count", i);
    total_ = std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
  }

  std::size_t size() const { return counts_.size(); }
  std::int64_t operator[](std::size_t i) const { return counts_[i]; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t total() const { return total_; }

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

/// tr(E rho), with values within tolerance of [0,1] snapped into it.
inline double born_probability(const DensityMatrix& rho, const CMatrix& element) {
  if (element.rows() != rho.dim() || element.cols() != rho.dim())
    throw Error(ErrorKind::DimensionMismatch, "element and state dimensions differ");
  const double p = trace_product(element, rho.matrix()).real();
  if (p < -tol::psd || p > 1.0 + tol::psd)
    throw Error(ErrorKind::DomainError, "Born probability outside [0,1]");
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace qpoly

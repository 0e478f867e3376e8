#pragma once

// Standard POVMs and states, multinomial data simulation and
// Hilbert-Schmidt random states.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "qpoly/quantum_core.hpp"
#include "qpoly/random.hpp"

namespace qpoly {

namespace detail {
inline CMatrix bloch_element(double weight, double x, double y, double z) {
  const auto p = pauli_matrices();
  return weight * (p[0] + x * p[1] + y * p[2] + z * p[3]);
}

inline HermitianBasis basis_or_default(const std::optional<HermitianBasis>& basis, int d) {
  if (!basis) return gellmann_basis(d);
  if (basis->dim() != d) throw Error(ErrorKind::DimensionMismatch, "basis dimension differs from POVM");
  return *basis;
}

inline bool is_prime(int d) {
  if (d < 2) return false;
  for (int q = 2; q * q <= d; ++q)
    if (d % q == 0) return false;
  return true;
}
}  // namespace detail

/// Regular-tetrahedron directions, the first along +z.
inline std::vector<Eigen::Vector3d> sic_directions() {
  const double s2 = std::sqrt(2.0);
  return {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(2 * s2 / 3, 0, -1.0 / 3),
          Eigen::Vector3d(-s2 / 3, std::sqrt(2.0 / 3), -1.0 / 3),
          Eigen::Vector3d(-s2 / 3, -std::sqrt(2.0 / 3), -1.0 / 3)};
}

inline Povm sic_qubit(const std::optional<HermitianBasis>& basis = std::nullopt) {
  std::vector<CMatrix> el;
  for (const auto& a : sic_directions()) el.push_back(detail::bloch_element(0.25, a.x(), a.y(), a.z()));
  return embed_povm(std::move(el), detail::basis_or_default(basis, 2));
}

/// Elements in the order +X, -X, +Y, -Y, +Z, -Z, each (1/6)(1 +- sigma_k).
inline Povm mub_qubit(const std::optional<HermitianBasis>& basis = std::nullopt) {
  std::vector<CMatrix> el;
  for (int k = 0; k < 3; ++k)
    for (double sign : {1.0, -1.0}) {
      Eigen::Vector3d a = Eigen::Vector3d::Zero();
      a(k) = sign;
      el.push_back(detail::bloch_element(1.0 / 6, a.x(), a.y(), a.z()));
    }
  return embed_povm(std::move(el), detail::basis_or_default(basis, 2));
}

/// Directions of the skewed SIC POVM; elements are (1/4)(1 + eta.sigma).
inline std::vector<Eigen::Vector3d> skewed_sic_directions() {
  return {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(3.0 / 10, 0, -1.0 / 3),
          Eigen::Vector3d(-3.0 / 20, 3.0 / 20, -1.0 / 3), Eigen::Vector3d(-3.0 / 20, -3.0 / 20, -1.0 / 3)};
}

inline Povm skewed_sic_qubit(const std::optional<HermitianBasis>& basis = std::nullopt) {
  std::vector<CMatrix> el;
  for (const auto& a : skewed_sic_directions()) el.push_back(detail::bloch_element(0.25, a.x(), a.y(), a.z()));
  return embed_povm(std::move(el), detail::basis_or_default(basis, 2));
}

/// Projective qubit measurement along X (0), Y (1) or Z (2): {(1+s)/2, (1-s)/2}.
inline Povm axis_povm(int axis, const std::optional<HermitianBasis>& basis = std::nullopt) {
  if (axis < 0 || axis > 2) throw Error(ErrorKind::DomainError, "axis must be 0, 1 or 2");
  std::vector<CMatrix> el;
  for (double sign : {1.0, -1.0}) {
    Eigen::Vector3d a = Eigen::Vector3d::Zero();
    a(axis) = sign;
    el.push_back(detail::bloch_element(0.5, a.x(), a.y(), a.z()));
  }
  return embed_povm(std::move(el), detail::basis_or_default(basis, 2));
}

/// Elementwise tensor products; the first factor's index varies slowest.
inline Povm tensor_povm(const std::vector<Povm>& factors,
                        const std::optional<HermitianBasis>& basis = std::nullopt) {
  if (factors.empty()) throw Error(ErrorKind::InvalidPovm, "tensor of zero POVMs");
  std::vector<CMatrix> el{CMatrix::Identity(1, 1)};
  for (const auto& f : factors) {
    std::vector<CMatrix> next;
    next.reserve(el.size() * f.size());
    for (const auto& a : el)
      for (const auto& b : f.elements()) next.push_back(kron(a, b));
    el = std::move(next);
  }
  const int d = static_cast<int>(el.front().rows());
  return embed_povm(std::move(el), detail::basis_or_default(basis, d));
}

/// Complete set of d+1 mutually unbiased bases for prime d, weighted 1/(d+1).
/// For odd d the non-computational bases are sum_j w^(a j^2 + b j)|j>/sqrt(d).
inline Povm mub_prime(int d, const std::optional<HermitianBasis>& basis = std::nullopt) {
  if (!detail::is_prime(d)) throw Error(ErrorKind::InvalidDimension, "mub_prime requires a prime dimension");
  if (d == 2) return mub_qubit(basis);
  const double w = 1.0 / (d + 1);
  std::vector<CMatrix> el;
  for (int b = 0; b < d; ++b) {
    CVector v = CVector::Zero(d);
    v(b) = 1.0;
    el.push_back(w * v * v.adjoint());
  }
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      CVector v(d);
      for (int j = 0; j < d; ++j) {
        const double phase = 2.0 * std::numbers::pi * ((a * j * j + b * j) % d) / d;
        v(j) = std::polar(1.0 / std::sqrt(static_cast<double>(d)), phase);
      }
      el.push_back(w * v * v.adjoint());
    }
  return embed_povm(std::move(el), detail::basis_or_default(basis, d));
}

namespace detail {
/// Projectors of one Pauli setting (0=X,1=Y,2=Z per qubit), outcomes ordered
/// with the +1 eigenvector first on each qubit, first qubit slowest.
inline std::vector<CMatrix> pauli_setting_projectors(const std::vector<int>& setting, double weight) {
  const auto p = pauli_matrices();
  std::vector<CMatrix> el{CMatrix::Identity(1, 1)};
  for (int axis : setting) {
    std::vector<CMatrix> next;
    for (const auto& a : el)
      for (double sign : {1.0, -1.0})
        next.push_back(kron(a, 0.5 * (p[0] + sign * p[static_cast<std::size_t>(axis + 1)])));
    el = std::move(next);
  }
  for (auto& e : el) e *= weight;
  return el;
}

inline std::vector<std::vector<int>> pauli_settings(int s) {
  std::vector<std::vector<int>> out;
  int total = 1;
  for (int q = 0; q < s; ++q) total *= 3;
  for (int code = 0; code < total; ++code) {
    std::vector<int> setting(static_cast<std::size_t>(s));
    int rest = code;
    for (int q = s - 1; q >= 0; --q) {
      setting[static_cast<std::size_t>(q)] = rest % 3;
      rest /= 3;
    }
    out.push_back(std::move(setting));
  }
  return out;
}
}  // namespace detail

/// Uniformly random choice among the 3^s local Pauli settings folded into a
/// single POVM of 6^s elements, each setting weighted 1/3^s.
inline Povm pauli_settings_povm(int s, const std::optional<HermitianBasis>& basis = std::nullopt) {
  if (s < 1 || s > 5) throw Error(ErrorKind::DomainError, "pauli_settings_povm supports 1..5 qubits");
  const auto settings = detail::pauli_settings(s);
  const double w = 1.0 / static_cast<double>(settings.size());
  std::vector<CMatrix> el;
  for (const auto& setting : settings)
    for (auto& e : detail::pauli_setting_projectors(setting, w)) el.push_back(std::move(e));
  return embed_povm(std::move(el), detail::basis_or_default(basis, 1 << s));
}

/// One projective POVM per Pauli setting, to be combined polytope-wise.
inline std::vector<Povm> pauli_settings_separate(int s, const std::optional<HermitianBasis>& basis = std::nullopt) {
  if (s < 1 || s > 5) throw Error(ErrorKind::DomainError, "pauli_settings_separate supports 1..5 qubits");
  const auto b = detail::basis_or_default(basis, 1 << s);
  std::vector<Povm> out;
  for (const auto& setting : detail::pauli_settings(s))
    out.push_back(embed_povm(detail::pauli_setting_projectors(setting, 1.0), b));
  return out;
}

inline DensityMatrix mixed_state(int d) { return DensityMatrix::maximally_mixed(d); }

inline DensityMatrix pure_state(const CVector& psi) { return DensityMatrix::pure(psi); }

inline DensityMatrix ghz_state(int s) {
  if (s < 1 || s > 5) throw Error(ErrorKind::DomainError, "ghz_state supports 1..5 qubits");
  const int d = 1 << s;
  CVector psi = CVector::Zero(d);
  psi(0) = psi(d - 1) = 1.0 / std::sqrt(2.0);
  return DensityMatrix::pure(psi);
}

inline DensityMatrix bell_state() { return ghz_state(2); }

/// (1-p)|Phi+><Phi+| + p 1/4.
inline DensityMatrix noisy_bell(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::DomainError, "noise parameter must lie in [0,1]");
  return DensityMatrix((1.0 - p) * bell_state().matrix() + p * CMatrix::Identity(4, 4) / 4.0);
}

inline DensityMatrix bloch_qubit(double x, double y, double z) {
  return DensityMatrix(detail::bloch_element(0.5, x, y, z));
}

/// Multinomial outcome tallies for n rounds, one categorical draw per round.
inline CountVector sample_counts(const DensityMatrix& rho, const Povm& povm, std::int64_t n, RngSeed seed) {
  if (n < 1) throw Error(ErrorKind::DomainError, "n must be >= 1");
  if (rho.dim() != povm.dim()) throw Error(ErrorKind::DimensionMismatch, "state and POVM dimensions differ");
  std::vector<double> cdf(povm.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < povm.size(); ++i) {
    const double p = trace_product(povm.element(i), rho.matrix()).real();
    if (p < -tol::psd) throw Error(ErrorKind::InvalidPovm, "negative outcome probability", i);
    acc += std::max(p, 0.0);
    cdf[i] = acc;
  }
  if (std::abs(acc - 1.0) > tol::trace) throw Error(ErrorKind::InvalidPovm, "outcome probabilities do not sum to one");
  Rng rng(seed);
  std::vector<std::int64_t> counts(povm.size(), 0);
  for (std::int64_t shot = 0; shot < n; ++shot) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  return CountVector(std::move(counts));
}

/// Hilbert-Schmidt random state: G G^dag / tr for a complex Ginibre d x d
/// matrix G, i.e. the partial trace of a Haar-random pure state on C^d x C^d.
inline DensityMatrix random_state_hs(int d, RngSeed seed) {
  if (d < 2) throw Error(ErrorKind::InvalidDimension, "d must be >= 2");
  Rng rng(seed);
  CMatrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::move(rho));
}

}  // namespace qpoly

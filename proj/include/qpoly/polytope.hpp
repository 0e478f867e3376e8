#pragma once

// Confidence polytopes: one half-space per POVM element (optionally per
// grouped element), intersected with the state body.
//
// Facet i reads  (d-1) eta_i . r  <=  m_i (n_i/n + delta_i) - 1,
// which is tr(E_i sigma) <= n_i/n + delta_i written in Bloch coordinates.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qpoly/clopper_pearson.hpp"
#include "qpoly/hash.hpp"
#include "qpoly/quantum_core.hpp"

namespace qpoly {

inline constexpr double kFacetSlack = 1e-12;

struct FacetProvenance {
  std::vector<std::size_t> members;  // POVM element indices; one entry unless grouped
  bool grouped = false;
  std::size_t measurement = 0;  // index of the source polytope after combine
  std::int64_t count = 0;       // n_i, or n_G for a group
  std::int64_t total = 0;       // n
};

struct Facet {
  RVector normal;
  double offset = 0.0;
  double eps_i = 0.0;
  bool clamped = false;  // vacuous: tr(E sigma) <= 1 holds for every state
  FacetProvenance provenance;

  double evaluate(const RVector& r) const { return normal.dot(r) - offset; }
  bool satisfied_by(const RVector& r, double slack = kFacetSlack) const {
    return normal.dot(r) <= offset + slack;
  }
};

struct PolytopeMetadata {
  std::vector<std::int64_t> n;  // data size per contributing measurement
  std::vector<std::string> povm_fingerprints;
};

/// Intersection of facets with the state body, carrying its error budget.
/// epsilon_total = sum of facet eps_i + epsilon_reserved, where the reserve
/// is budget attached without facets (e.g. an empty polytope in a combine).
class ConfidencePolytope {
 public:
  ConfidencePolytope(HermitianBasis basis, std::vector<Facet> facets, double epsilon_reserved,
                     PolytopeMetadata meta = {})
      : basis_(std::move(basis)),
        facets_(std::move(facets)),
        epsilon_reserved_(epsilon_reserved),
        meta_(std::move(meta)) {
    const auto dim = static_cast<Eigen::Index>(basis_.size());
    for (std::size_t i = 0; i < facets_.size(); ++i)
      if (facets_[i].normal.size() != dim)
        throw Error(ErrorKind::DimensionMismatch, "facet normal length differs from d^2-1", i);
    if (epsilon_reserved_ < 0.0) throw Error(ErrorKind::DomainError, "negative reserved epsilon");
    epsilon_total_ = epsilon_reserved_;
    for (const auto& f : facets_) epsilon_total_ += f.eps_i;
  }

  static ConfidencePolytope empty(HermitianBasis basis, double epsilon) {
    return ConfidencePolytope(std::move(basis), {}, epsilon);
  }

  int dim() const { return basis_.dim(); }
  std::size_t ambient_dim() const { return basis_.size(); }
  const HermitianBasis& basis() const { return basis_; }
  const std::vector<Facet>& facets() const { return facets_; }
  double epsilon_total() const { return epsilon_total_; }
  double epsilon_reserved() const { return epsilon_reserved_; }
  const PolytopeMetadata& metadata() const { return meta_; }

  /// Facet system only; the state body is not consulted.
  bool facets_contain(const RVector& r, double slack = kFacetSlack) const {
    return std::all_of(facets_.begin(), facets_.end(),
                       [&](const Facet& f) { return f.satisfied_by(r, slack); });
  }

  /// Constraint matrix A (one row per facet) and offsets b of A r <= b.
  std::pair<RMatrix, RVector> constraints() const {
    RMatrix a(static_cast<Eigen::Index>(facets_.size()), static_cast<Eigen::Index>(ambient_dim()));
    RVector b(static_cast<Eigen::Index>(facets_.size()));
    for (std::size_t i = 0; i < facets_.size(); ++i) {
      a.row(static_cast<Eigen::Index>(i)) = facets_[i].normal.transpose();
      b(static_cast<Eigen::Index>(i)) = facets_[i].offset;
    }
    return {std::move(a), std::move(b)};
  }

 private:
  HermitianBasis basis_;
  std::vector<Facet> facets_;
  double epsilon_reserved_ = 0.0;
  double epsilon_total_ = 0.0;
  PolytopeMetadata meta_;
};

struct EpsilonSplit {
  enum class Strategy { uniform, weighted };
  Strategy strategy = Strategy::uniform;
  std::vector<double> weights;

  static EpsilonSplit uniform() { return {}; }
  static EpsilonSplit weighted(std::vector<double> w) { return {Strategy::weighted, std::move(w)}; }
};

inline std::vector<double> split_epsilon(double eps, std::size_t k, const EpsilonSplit& split) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::DomainError, "epsilon must lie in (0,1)");
  if (k == 0) throw Error(ErrorKind::InvalidSplit, "cannot split epsilon over zero facets");
  if (split.strategy == EpsilonSplit::Strategy::uniform)
    return std::vector<double>(k, eps / static_cast<double>(k));
  if (split.weights.size() != k)
    throw Error(ErrorKind::InvalidSplit, "weight count differs from facet count");
  for (std::size_t i = 0; i < k; ++i)
    if (!(split.weights[i] > 0.0) || !std::isfinite(split.weights[i]))
      throw Error(ErrorKind::InvalidSplit, "split weights must be positive", i);
  const double total = std::accumulate(split.weights.begin(), split.weights.end(), 0.0);
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = eps * split.weights[i] / total;
  return out;
}

inline std::string povm_fingerprint(const Povm& povm) {
  Fnv1a h;
  for (const auto& e : povm.elements())
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      h.update(e.data()[i].real());
      h.update(e.data()[i].imag());
    }
  return h.hex();
}

/// Half-space for an element with Bloch weight m and direction eta.
inline Facet make_facet(const RVector& eta, double m, int d, std::int64_t ni, std::int64_t n,
                        double eps_i) {
  const DeltaSolution sol = solve_delta(ni, n, eps_i);
  Facet f;
  f.normal = (d - 1.0) * eta;
  f.offset = m * sol.bound - 1.0;
  f.eps_i = eps_i;
  f.clamped = sol.clamped;
  f.provenance.count = ni;
  f.provenance.total = n;
  return f;
}

namespace detail {
inline void check_data(const Povm& povm, const CountVector& counts) {
  if (counts.size() != povm.size())
    throw Error(ErrorKind::DimensionMismatch, "count vector length differs from POVM size");
  if (counts.total() < 1) throw Error(ErrorKind::DomainError, "no measurement data (n = 0)");
}
}  // namespace detail

inline ConfidencePolytope build_polytope(const Povm& povm, const CountVector& counts, double eps,
                                         const EpsilonSplit& split = EpsilonSplit::uniform()) {
  detail::check_data(povm, counts);
  const auto eps_i = split_epsilon(eps, povm.size(), split);
  std::vector<Facet> facets;
  facets.reserve(povm.size());
  for (std::size_t i = 0; i < povm.size(); ++i) {
    Facet f = make_facet(povm.eta(i), povm.weight(i), povm.dim(), counts[i], counts.total(), eps_i[i]);
    f.provenance.members = {i};
    facets.push_back(std::move(f));
  }
  return ConfidencePolytope(povm.basis(), std::move(facets), 0.0,
                            {{counts.total()}, {povm_fingerprint(povm)}});
}

/// Facets for coarse-grained elements E_G = sum_{i in G} E_i with count
/// n_G = sum_{i in G} n_i. Groups must be non-empty proper subsets of the
/// element indices (0-based) and pairwise distinct as sets.
inline std::vector<Facet> group_facets(const Povm& povm, const CountVector& counts,
                                       const std::vector<std::vector<std::size_t>>& groups,
                                       const std::vector<double>& eps_budget) {
  detail::check_data(povm, counts);
  if (eps_budget.size() != groups.size())
    throw Error(ErrorKind::InvalidSplit, "one epsilon share is required per group");
  std::set<std::vector<std::size_t>> seen;
  std::vector<Facet> out;
  out.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<std::size_t> members = groups[g];
    std::sort(members.begin(), members.end());
    if (members.empty()) throw Error(ErrorKind::InvalidGroup, "empty group", g);
    if (std::adjacent_find(members.begin(), members.end()) != members.end())
      throw Error(ErrorKind::InvalidGroup, "repeated index within group", g);
    if (members.back() >= povm.size()) throw Error(ErrorKind::InvalidGroup, "group index out of range", g);
    if (members.size() == povm.size()) throw Error(ErrorKind::InvalidGroup, "group covers every element", g);
    if (!seen.insert(members).second) throw Error(ErrorKind::InvalidGroup, "duplicate group", g);

    // E_G = (1/m_G)(1 + c eta_G.lambda) with 1/m_G = sum 1/m_i, eta_G = m_G sum eta_i/m_i
    double inv_m = 0.0;
    RVector eta = RVector::Zero(static_cast<Eigen::Index>(povm.basis().size()));
    std::int64_t ng = 0;
    for (auto i : members) {
      inv_m += 1.0 / povm.weight(i);
      eta += povm.eta(i) / povm.weight(i);
      ng += counts[i];
    }
    const double m = 1.0 / inv_m;
    Facet f = make_facet(m * eta, m, povm.dim(), ng, counts.total(), eps_budget[g]);
    f.provenance.members = std::move(members);
    f.provenance.grouped = true;
    out.push_back(std::move(f));
  }
  return out;
}

/// New polytope with `extra` appended; their eps_i add to the budget.
inline ConfidencePolytope append_facets(const ConfidencePolytope& poly, std::vector<Facet> extra) {
  std::vector<Facet> facets = poly.facets();
  for (auto& f : extra) facets.push_back(std::move(f));
  return ConfidencePolytope(poly.basis(), std::move(facets), poly.epsilon_reserved(), poly.metadata());
}

/// Base facets plus one facet per group, all at a total level eps. The split
/// covers the k + |groups| facets, base elements first.
inline ConfidencePolytope build_grouped_polytope(const Povm& povm, const CountVector& counts, double eps,
                                                 const std::vector<std::vector<std::size_t>>& groups,
                                                 const EpsilonSplit& split = EpsilonSplit::uniform()) {
  detail::check_data(povm, counts);
  const auto shares = split_epsilon(eps, povm.size() + groups.size(), split);
  std::vector<double> base(shares.begin(), shares.begin() + static_cast<std::ptrdiff_t>(povm.size()));
  std::vector<double> grouped(shares.begin() + static_cast<std::ptrdiff_t>(povm.size()), shares.end());
  const auto poly = build_polytope(povm, counts, std::accumulate(base.begin(), base.end(), 0.0),
                                   EpsilonSplit::weighted(base));
  return append_facets(poly, group_facets(povm, counts, groups, grouped));
}

/// Intersection of polytopes from independent measurements; the union bound
/// gives a confidence level of 1 - sum of the individual epsilons.
inline ConfidencePolytope combine_polytopes(const std::vector<ConfidencePolytope>& polys) {
  if (polys.empty()) throw Error(ErrorKind::DomainError, "nothing to combine");
  const HermitianBasis& basis = polys.front().basis();
  std::vector<Facet> facets;
  double reserved = 0.0;
  PolytopeMetadata meta;
  for (std::size_t j = 0; j < polys.size(); ++j) {
    if (!polys[j].basis().same_as(basis))
      throw Error(ErrorKind::BasisMismatch, "polytopes use different bases", j);
    for (Facet f : polys[j].facets()) {
      f.provenance.measurement = j;
      facets.push_back(std::move(f));
    }
    reserved += polys[j].epsilon_reserved();
    const auto& m = polys[j].metadata();
    meta.n.insert(meta.n.end(), m.n.begin(), m.n.end());
    meta.povm_fingerprints.insert(meta.povm_fingerprints.end(), m.povm_fingerprints.begin(),
                                  m.povm_fingerprints.end());
  }
  return ConfidencePolytope(basis, std::move(facets), reserved, std::move(meta));
}

/// Membership of a Hermitian trace-one matrix: every facet within 1e-12 and
/// the matrix PSD within tol::psd.
inline bool contains(const ConfidencePolytope& poly, const DensityMatrix& rho) {
  if (rho.dim() != poly.dim()) throw Error(ErrorKind::DimensionMismatch, "state dimension differs from polytope");
  const BlochVector r = embed_state(rho, poly.basis());
  return poly.facets_contain(r.coords) && rho.is_psd();
}

}  // namespace qpoly

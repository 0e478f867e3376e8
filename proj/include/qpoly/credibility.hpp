#pragma once

// Posterior mass outside a polytope under the Hilbert-Schmidt prior,
// estimated by self-normalised importance sampling.
//
// The Hilbert-Schmidt measure is flat (Lebesgue) on the state body in Bloch
// coordinates, so the posterior density is proportional to the likelihood
// prod_i tr(E_i rho)^{n_i} restricted to the body. Two proposals are offered:
//   prior   - Hilbert-Schmidt random states; weight = likelihood.
//   laplace - multivariate Student-t (4 dof) centred at the MLE with the
//             inverse Fisher information (inflated 1.5x) as scale; weight =
//             likelihood / proposal density, zero outside the body.
// `automatic` uses laplace whenever there is data and the prior otherwise.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qpoly/figures_of_merit.hpp"
#include "qpoly/parallel.hpp"
#include "qpoly/polytope.hpp"
#include "qpoly/random.hpp"
#include "qpoly/simulation.hpp"

namespace qpoly {

enum class ProposalKind { automatic, prior, laplace };

inline std::string to_string(ProposalKind p) {
  switch (p) {
    case ProposalKind::automatic: return "automatic";
    case ProposalKind::prior: return "prior";
    case ProposalKind::laplace: return "laplace";
  }
  return "unknown";
}

struct CredibilityOptions {
  std::size_t mc = 200000;
  RngSeed seed{};
  ProposalKind proposal = ProposalKind::automatic;
  unsigned threads = 1;
};

struct CredibilityEstimate {
  double eps_b_hat = 0.0;
  double std_error = 0.0;
  double effective_sample_size = 0.0;
  std::size_t mc_samples = 0;
  RngSeed seed{};
  ProposalKind proposal = ProposalKind::prior;
  bool low_ess = false;  // ESS below 100
};

namespace detail {

inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double log_likelihood_bloch(const Povm& povm, const CountVector& counts, const RVector& r) {
  const RVector p = povm.probabilities(r);
  double ll = 0.0;
  for (std::size_t i = 0; i < povm.size(); ++i) {
    if (counts[i] == 0) continue;
    const double pi = p(static_cast<Eigen::Index>(i));
    if (!(pi > 0.0)) return -std::numeric_limits<double>::infinity();
    ll += static_cast<double>(counts[i]) * std::log(pi);
  }
  return ll;
}

struct StudentProposal {
  RVector center;
  RMatrix chol;  // lower factor of the scale matrix
  double dof = 4.0;
};

inline StudentProposal laplace_proposal(const Povm& povm, const CountVector& counts) {
  const auto dim = static_cast<Eigen::Index>(povm.basis().size());
  MleOptions mo;
  mo.max_iterations = 5000;
  mo.tolerance = 1e-10;
  const MleResult mle = mle_estimate(povm, counts, mo);
  StudentProposal prop;
  prop.center = embed_state(mle.state, povm.basis()).coords;

  // Fisher information n sum_i g_i g_i^T / q_i, g_i = (d-1) eta_i / m_i, with
  // smoothed frequencies q_i; the identity term keeps unobserved directions
  // at the scale of the state body.
  const double n = static_cast<double>(counts.total());
  const double k = static_cast<double>(povm.size());
  RMatrix info = RMatrix::Identity(dim, dim);
  for (std::size_t i = 0; i < povm.size(); ++i) {
    const RVector g = (povm.dim() - 1.0) * povm.eta(i) / povm.weight(i);
    const double q = (static_cast<double>(counts[i]) + 0.5) / (n + 0.5 * k);
    info += (n / q) * g * g.transpose();
  }
  const double inflation = 1.5;
  RMatrix cov = info.inverse() * (inflation * inflation);
  cov = 0.5 * (cov + cov.transpose()).eval();
  Eigen::LLT<RMatrix> llt(cov);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "proposal covariance is not positive definite");
  prop.chol = llt.matrixL();
  return prop;
}

}  // namespace detail

inline CredibilityEstimate estimate_credibility(const ConfidencePolytope& poly, const Povm& povm,
                                                const CountVector& counts, const CredibilityOptions& opts) {
  if (opts.mc < 1000) throw Error(ErrorKind::DomainError, "at least 10^3 Monte-Carlo samples are required");
  if (counts.size() != povm.size()) throw Error(ErrorKind::DimensionMismatch, "count vector length differs from POVM size");
  if (poly.dim() != povm.dim() || !poly.basis().same_as(povm.basis()))
    throw Error(ErrorKind::BasisMismatch, "polytope and POVM use different bases");

  ProposalKind kind = opts.proposal;
  if (kind == ProposalKind::automatic) kind = counts.total() > 0 ? ProposalKind::laplace : ProposalKind::prior;
  detail::StudentProposal prop;
  if (kind == ProposalKind::laplace) {
    if (counts.total() < 1) throw Error(ErrorKind::DomainError, "laplace proposal needs data");
    prop = detail::laplace_proposal(povm, counts);
  }

  const HermitianBasis& basis = poly.basis();
  const int d = poly.dim();
  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::vector<double> logw(opts.mc, -std::numeric_limits<double>::infinity());
  std::vector<char> outside(opts.mc, 0);

  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (opts.mc + kBlock - 1) / kBlock;
  parallel_for(blocks, opts.threads, [&](std::size_t blk) {
    Rng rng(opts.seed.derive(blk));
    RVector z(dim);
    const std::size_t end = std::min(opts.mc, (blk + 1) * kBlock);
    for (std::size_t j = blk * kBlock; j < end; ++j) {
      RVector r;
      double log_q = 0.0;
      if (kind == ProposalKind::prior) {
        CMatrix g(d, d);
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) g(a, b) = Complex(rng.normal(), rng.normal());
        CMatrix rho = g * g.adjoint();
        rho /= rho.trace().real();
        r = embed_matrix(rho, basis).coords;
      } else {
        for (Eigen::Index i = 0; i < dim; ++i) z(i) = rng.normal();
        double chi2 = 0.0;
        for (int i = 0; i < static_cast<int>(prop.dof); ++i) {
          const double e = rng.normal();
          chi2 += e * e;
        }
        const double scale = std::sqrt(prop.dof / chi2);
        r = prop.center + prop.chol * (z * scale);
        const double q = z.squaredNorm() * scale * scale;
        log_q = -0.5 * (prop.dof + static_cast<double>(dim)) * std::log1p(q / prop.dof);
        if (r.squaredNorm() > 1.0 || !psd_for_sampling(unembed_matrix(r, basis))) continue;
      }
      const double ll = detail::log_likelihood_bloch(povm, counts, r);
      logw[j] = ll - log_q;
      outside[j] = poly.facets_contain(r) ? 0 : 1;
    }
  });

  const double shift = *std::max_element(logw.begin(), logw.end());
  if (!std::isfinite(shift)) throw Error(ErrorKind::DegenerateWeights, "all importance weights vanish; use smaller n or more samples");
  std::vector<double> w(opts.mc), wz(opts.mc), w2(opts.mc);
  for (std::size_t j = 0; j < opts.mc; ++j) {
    w[j] = std::exp(logw[j] - shift);
    wz[j] = outside[j] ? w[j] : 0.0;
    w2[j] = w[j] * w[j];
  }
  const double sw = detail::pairwise_sum(w.data(), w.size());
  const double swz = detail::pairwise_sum(wz.data(), wz.size());
  const double sw2 = detail::pairwise_sum(w2.data(), w2.size());

  CredibilityEstimate est;
  est.eps_b_hat = swz / sw;
  for (std::size_t j = 0; j < opts.mc; ++j) {
    const double dev = (outside[j] ? 1.0 : 0.0) - est.eps_b_hat;
    w2[j] *= dev * dev;
  }
  est.std_error = std::sqrt(detail::pairwise_sum(w2.data(), w2.size())) / sw;
  est.effective_sample_size = sw * sw / sw2;
  est.mc_samples = opts.mc;
  est.seed = opts.seed;
  est.proposal = kind;
  est.low_ess = est.effective_sample_size < 100.0;
  if (est.effective_sample_size < 10.0)
    throw Error(ErrorKind::DegenerateWeights, "effective sample size below 10; use smaller n or more samples");
  return est;
}

inline CredibilityEstimate estimate_credibility(const ConfidencePolytope& poly, const Povm& povm,
                                                const CountVector& counts, std::size_t mc, RngSeed seed) {
  CredibilityOptions opts;
  opts.mc = mc;
  opts.seed = seed;
  return estimate_credibility(poly, povm, counts, opts);
}

/// IC POVM used per dimension in scans: SIC for a qubit, a complete MUB set
/// for prime d, SIC x SIC for d = 4.
inline Povm scan_povm(int d) {
  if (d == 2) return sic_qubit();
  if (d == 4) return tensor_povm({sic_qubit(), sic_qubit()});
  if (detail::is_prime(d)) return mub_prime(d);
  throw Error(ErrorKind::DomainError, "no scan POVM for this dimension");
}

struct ScanRow {
  int d = 0;
  std::int64_t n = 0;
  std::size_t rep = 0;
  double eps = 0.0;
  double eps_b_hat = std::numeric_limits<double>::quiet_NaN();
  double std_error = std::numeric_limits<double>::quiet_NaN();
  double ess = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
};

struct ScanOptions {
  std::size_t mc = 200000;
  RngSeed seed{};
  ProposalKind proposal = ProposalKind::automatic;
  unsigned threads = 1;
};

/// For each (d, n, rep): Hilbert-Schmidt random state, simulated counts,
/// polytope at level eps and its credibility estimate. Rows are ordered
/// d-major, then n, then rep; each row uses seed.derive(row index).
inline std::vector<ScanRow> ratio_scan(const std::vector<int>& dims, const std::vector<std::int64_t>& ns,
                                       std::size_t reps, double eps, const ScanOptions& opts) {
  for (int d : dims)
    if (d < 2 || d > 4) throw Error(ErrorKind::DomainError, "ratio_scan supports 2 <= d <= 4");
  for (auto n : ns)
    if (n < 1 || n > 5000) throw Error(ErrorKind::DomainError, "ratio_scan supports 1 <= n <= 5000");
  std::vector<ScanRow> rows;
  for (int d : dims)
    for (auto n : ns)
      for (std::size_t rep = 0; rep < reps; ++rep) rows.push_back({d, n, rep, eps});

  parallel_for(rows.size(), opts.threads, [&](std::size_t idx) {
    ScanRow& row = rows[idx];
    const RngSeed s = opts.seed.derive(idx);
    const Povm povm = scan_povm(row.d);
    const DensityMatrix rho = random_state_hs(row.d, s.derive(0));
    const CountVector counts = sample_counts(rho, povm, row.n, s.derive(1));
    const ConfidencePolytope poly = build_polytope(povm, counts, eps);
    CredibilityOptions co;
    co.mc = opts.mc;
    co.seed = s.derive(2);
    co.proposal = opts.proposal;
    try {
      const auto est = estimate_credibility(poly, povm, counts, co);
      row.eps_b_hat = est.eps_b_hat;
      row.std_error = est.std_error;
      row.ess = est.effective_sample_size;
      row.ratio = eps / est.eps_b_hat;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateWeights) throw;
      row.degenerate = true;
    }
  });
  return rows;
}

}  // namespace qpoly

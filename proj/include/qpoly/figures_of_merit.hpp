#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qpoly/geometry.hpp"
#include "qpoly/parallel.hpp"

namespace qpoly {

namespace detail {
inline void check_same_dim(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "states have different dimensions");
}

inline std::optional<CVector> pure_vector(const DensityMatrix& rho) {
  if (rho.purity() < 1.0 - 1e-12) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix());
  return es.eigenvectors().col(rho.dim() - 1);
}
}  // namespace detail

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2. When either
/// argument is pure this reduces to <psi|other|psi>, which is used directly.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  detail::check_same_dim(rho, sigma);
  double f;
  if (auto psi = detail::pure_vector(sigma)) {
    f = (psi->adjoint() * rho.matrix() * *psi)(0, 0).real();
  } else if (auto phi = detail::pure_vector(rho)) {
    f = (phi->adjoint() * sigma.matrix() * *phi)(0, 0).real();
  } else {
    const CMatrix sr = hermitian_sqrt(rho.matrix());
    const CMatrix inner = sr * sigma.matrix() * sr;
    const RVector ev = hermitian_eigenvalues(0.5 * (inner + inner.adjoint())).cwiseMax(0.0);
    const double t = ev.cwiseSqrt().sum();
    f = t * t;
  }
  return std::clamp(f, 0.0, 1.0);
}

inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  detail::check_same_dim(rho, sigma);
  const CMatrix diff = rho.matrix() - sigma.matrix();
  return std::clamp(0.5 * hermitian_eigenvalues(diff).cwiseAbs().sum(), 0.0, 1.0);
}

/// Partial transpose of every subsystem at position >= cut.
inline CMatrix partial_transpose(const CMatrix& m, const std::vector<int>& dims, std::size_t cut) {
  if (dims.size() < 2 || cut < 1 || cut >= dims.size())
    throw Error(ErrorKind::DimensionMismatch, "bipartition needs at least two subsystems and 1 <= cut < #subsystems");
  int da = 1, db = 1;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1) throw Error(ErrorKind::DimensionMismatch, "subsystem dimensions must be positive");
    (i < cut ? da : db) *= dims[i];
  }
  if (da * db != m.rows()) throw Error(ErrorKind::DimensionMismatch, "subsystem dimensions do not multiply to d");
  CMatrix out(m.rows(), m.cols());
  for (int a = 0; a < da; ++a)
    for (int b = 0; b < db; ++b)
      for (int a2 = 0; a2 < da; ++a2)
        for (int b2 = 0; b2 < db; ++b2) out(a * db + b, a2 * db + b2) = m(a * db + b2, a2 * db + b);
  return out;
}

/// (||rho^{T_B}||_1 - 1) / 2 for the bipartition dims[0..cut) | dims[cut..).
inline double negativity(const DensityMatrix& rho, const std::vector<int>& dims, std::size_t cut) {
  const CMatrix pt = partial_transpose(rho.matrix(), dims, cut);
  const double norm1 = hermitian_eigenvalues(pt).cwiseAbs().sum();
  return std::max(0.0, 0.5 * (norm1 - 1.0));
}

struct MleOptions {
  std::size_t max_iterations = 100000;
  double tolerance = 1e-12;  // stop once the log-likelihood gain falls below this
  double regularisation = 1e-6;
  bool record_trace = false;
};

struct MleResult {
  DensityMatrix state = DensityMatrix::maximally_mixed(2);
  double log_likelihood = 0.0;
  std::size_t iterations = 0;
  bool informationally_complete = true;
  std::vector<double> trace;  // log-likelihood after each accepted step
};

inline double log_likelihood(const Povm& povm, const CountVector& counts, const CMatrix& rho) {
  double ll = 0.0;
  for (std::size_t i = 0; i < povm.size(); ++i) {
    if (counts[i] == 0) continue;
    const double p = trace_product(povm.element(i), rho).real();
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    ll += static_cast<double>(counts[i]) * std::log(p);
  }
  return ll;
}

/// R(rho) = sum_i n_i / (n tr(E_i rho)) E_i
inline CMatrix likelihood_operator(const Povm& povm, const CountVector& counts, const CMatrix& rho) {
  const int d = povm.dim();
  CMatrix r = CMatrix::Zero(d, d);
  const double n = static_cast<double>(counts.total());
  for (std::size_t i = 0; i < povm.size(); ++i) {
    if (counts[i] == 0) continue;
    const double p = trace_product(povm.element(i), rho).real();
    r += (static_cast<double>(counts[i]) / (n * p)) * povm.element(i);
  }
  return r;
}

inline bool is_informationally_complete(const Povm& povm) {
  RMatrix etas(static_cast<Eigen::Index>(povm.basis().size()), static_cast<Eigen::Index>(povm.size()));
  for (std::size_t i = 0; i < povm.size(); ++i) etas.col(static_cast<Eigen::Index>(i)) = povm.eta(i);
  Eigen::FullPivLU<RMatrix> lu(etas);
  lu.setThreshold(1e-10);
  return lu.rank() == etas.rows();
}

/// Iterative R rho R maximum-likelihood estimate. A step that would lower the
/// likelihood is replaced by the diluted update (1 + t R) rho (1 + t R) with
/// t halved until the likelihood does not decrease, so the recorded sequence
/// is non-decreasing.
inline MleResult mle_estimate(const Povm& povm, const CountVector& counts, const MleOptions& opts = {}) {
  if (counts.size() != povm.size()) throw Error(ErrorKind::DimensionMismatch, "count vector length differs from POVM size");
  if (counts.total() < 1) throw Error(ErrorKind::DomainError, "no measurement data (n = 0)");
  const int d = povm.dim();
  const CMatrix id = CMatrix::Identity(d, d);
  MleResult out;
  out.informationally_complete = is_informationally_complete(povm);

  auto normalise = [](CMatrix m) {
    m = 0.5 * (m + m.adjoint()).eval();
    return CMatrix(m / m.trace().real());
  };

  CMatrix rho = id / static_cast<double>(d);
  double ll = log_likelihood(povm, counts, rho);
  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (!std::isfinite(ll)) {
      rho = (1.0 - opts.regularisation) * rho + opts.regularisation * id / static_cast<double>(d);
      ll = log_likelihood(povm, counts, rho);
      continue;
    }
    const CMatrix r = likelihood_operator(povm, counts, rho);
    CMatrix next = normalise(r * rho * r);
    double next_ll = log_likelihood(povm, counts, next);
    for (double t = 1.0; !(next_ll >= ll) && t > 1e-12; t *= 0.5) {
      const CMatrix step = id + t * r;
      next = normalise(step * rho * step);
      next_ll = log_likelihood(povm, counts, next);
    }
    if (!(next_ll >= ll)) break;
    const double gain = next_ll - ll;
    rho = std::move(next);
    ll = next_ll;
    if (opts.record_trace) out.trace.push_back(ll);
    if (gain < opts.tolerance) {
      ++it;
      break;
    }
  }
  out.state = DensityMatrix(rho, DensityMatrix::Check::skip_psd);
  out.log_likelihood = ll;
  out.iterations = it;
  return out;
}

enum class FomKind { fidelity, trace_distance, negativity };

inline std::string to_string(FomKind k) {
  switch (k) {
    case FomKind::fidelity: return "fidelity";
    case FomKind::trace_distance: return "trace_distance";
    case FomKind::negativity: return "negativity";
  }
  return "unknown";
}

struct FomSpec {
  FomKind kind = FomKind::fidelity;
  std::optional<DensityMatrix> reference;  // fidelity / trace distance
  std::vector<int> dims;                   // negativity bipartition
  std::size_t cut = 0;

  void validate(int d) const {
    if (kind == FomKind::negativity) {
      if (dims.empty()) throw Error(ErrorKind::DomainError, "negativity requires an explicit bipartition");
      int prod = 1;
      for (int x : dims) prod *= x;
      if (prod != d) throw Error(ErrorKind::DimensionMismatch, "subsystem dimensions do not multiply to d");
      if (cut < 1 || cut >= dims.size()) throw Error(ErrorKind::DimensionMismatch, "cut must satisfy 1 <= cut < #subsystems");
    } else {
      if (!reference) throw Error(ErrorKind::DomainError, "fidelity and trace distance need a reference state");
      if (reference->dim() != d) throw Error(ErrorKind::DimensionMismatch, "reference dimension differs from polytope");
    }
  }

  double evaluate(const DensityMatrix& rho) const {
    switch (kind) {
      case FomKind::fidelity: return fidelity(rho, *reference);
      case FomKind::trace_distance: return trace_distance(rho, *reference);
      case FomKind::negativity: return negativity(rho, dims, cut);
    }
    return 0.0;
  }
};

struct FomInterval {
  FomKind kind = FomKind::fidelity;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t sample_count = 0;
  RngSeed seed{};
  RVector argmin;  // Bloch coordinates of the sampled states attaining the extremes
  RVector argmax;
};

/// Empirical range of the figure of merit over a hit-and-run sample.
inline FomInterval fom_interval(const ConfidencePolytope& poly, const FomSpec& spec, const SamplerOptions& opts) {
  spec.validate(poly.dim());
  const SampleSet samples = hit_and_run_sample(poly, opts);
  if (samples.states.empty()) throw Error(ErrorKind::DomainError, "sampler returned no states");
  std::vector<double> values(samples.states.size());
  parallel_for(values.size(), opts.threads, [&](std::size_t i) { values[i] = spec.evaluate(samples.states[i]); });
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  FomInterval out;
  out.kind = spec.kind;
  out.lower = *mn;
  out.upper = *mx;
  out.sample_count = values.size();
  out.seed = opts.seed;
  out.argmin = samples.points[static_cast<std::size_t>(mn - values.begin())];
  out.argmax = samples.points[static_cast<std::size_t>(mx - values.begin())];
  return out;
}

}  // namespace qpoly

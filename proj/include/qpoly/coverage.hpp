#pragma once

// Empirical coverage: how often the polytope built from simulated data
// contains the state that generated it.

#include <cmath>
#include <optional>
#include <vector>

#include "qpoly/parallel.hpp"
#include "qpoly/polytope.hpp"
#include "qpoly/simulation.hpp"

namespace qpoly {

struct CoverageOptions {
  std::int64_t n = 1000;
  double eps = 0.1;
  std::size_t repetitions = 1000;
  RngSeed seed{};
  std::vector<std::vector<std::size_t>> groups;  // empty: plain polytope
  unsigned threads = 1;
};

struct CoverageResult {
  std::size_t hits = 0;
  std::size_t repetitions = 0;
  double rate = 0.0;
  double sigma = 0.0;  // binomial standard deviation of the rate at 1 - eps
};

/// Repetition r simulates its counts with seed.derive(r).
inline CoverageResult empirical_coverage(const DensityMatrix& rho, const Povm& povm, const CoverageOptions& opts) {
  if (opts.repetitions == 0) throw Error(ErrorKind::DomainError, "at least one repetition is required");
  const RVector truth = embed_state(rho, povm.basis()).coords;
  std::vector<char> hit(opts.repetitions, 0);
  parallel_for(opts.repetitions, opts.threads, [&](std::size_t r) {
    const CountVector counts = sample_counts(rho, povm, opts.n, opts.seed.derive(r));
    const ConfidencePolytope poly = opts.groups.empty()
                                        ? build_polytope(povm, counts, opts.eps)
                                        : build_grouped_polytope(povm, counts, opts.eps, opts.groups);
    hit[r] = poly.facets_contain(truth) ? 1 : 0;
  });
  CoverageResult out;
  out.repetitions = opts.repetitions;
  for (char h : hit) out.hits += static_cast<std::size_t>(h);
  out.rate = static_cast<double>(out.hits) / static_cast<double>(out.repetitions);
  out.sigma = std::sqrt(opts.eps * (1.0 - opts.eps) / static_cast<double>(out.repetitions));
  return out;
}

}  // namespace qpoly

#pragma once

#include <cstddef>
#include <vector>

#include "abcmc/core.hpp"

namespace abcmc {

/// n points over the prior box, one per stratum in every dimension, with the
/// strata permuted independently per dimension and positions uniform within
/// each stratum.
std::vector<ParamVector> latin_hypercube(const PriorSpec& prior, int n, RngStream& rng);

/// Empirical alpha-quantile: the smallest member x of `values` whose
/// empirical CDF reaches alpha. No interpolation; the result is always a
/// member of the multiset.
double alpha_quantile(std::vector<double> values, double alpha);

/// Cumulative-weight table shared by weighted_pick and multinomial_resample
/// so every selection path maps a uniform draw to the same index.
class CumulativeWeights {
 public:
  explicit CumulativeWeights(const WeightedSample& sample);
  std::size_t pick(RngStream& rng) const;

 private:
  std::vector<double> cumulative_;
};

/// Index of one particle drawn with probability proportional to weight.
std::size_t weighted_pick(const WeightedSample& sample, RngStream& rng);

/// n draws with replacement, returned with equal weights 1/n.
WeightedSample multinomial_resample(const WeightedSample& sample, int n, RngStream& rng);

}  // namespace abcmc

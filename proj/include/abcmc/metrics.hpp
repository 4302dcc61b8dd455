#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "abcmc/core.hpp"

namespace abcmc {

/// Regular histogram grid over an axis-aligned box.
struct GridSpec {
  std::vector<std::pair<double, double>> box;
  std::vector<int> bins;

  int dimension() const { return static_cast<int>(box.size()); }
  std::size_t cell_count() const;
  void validate() const;
};

/// Density-normalized histogram: values are per-cell densities, flattened
/// row-major, and sum(value * cell_volume) == 1.
struct HistogramGrid {
  GridSpec spec;
  std::vector<double> values;
  double cell_volume = 0.0;
};

using DensityFn = std::function<double(const ParamVector&)>;

/// Weighted histogram of a sample; every particle must lie inside the box.
HistogramGrid weighted_histogram(const WeightedSample& sample, const GridSpec& spec);

/// L2 distance between a histogram and an exact density, the exact side
/// discretized by per-cell midpoint quadrature with `subpoints` points per
/// cell per dimension.
double l2_distance(const HistogramGrid& hist, const DensityFn& exact, int subpoints = 32);

/// Number of bitwise-distinct parameter vectors in the sample.
std::int64_t distinct_count(const WeightedSample& sample);

/// Cost-quality score: n_sims * l2^2 (lower is better).
double efficiency_criterion(std::uint64_t n_sims, double l2);

}  // namespace abcmc

#include "abcmc/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace abcmc {

std::size_t GridSpec::cell_count() const {
  std::size_t n = 1;
  for (int b : bins) n *= static_cast<std::size_t>(b);
  return n;
}

void GridSpec::validate() const {
  if (box.empty() || box.size() != bins.size())
    throw ContractViolation("grid box and bin counts must have matching dimensions");
  for (std::size_t k = 0; k < box.size(); ++k) {
    if (!(box[k].first < box[k].second))
      throw ContractViolation("grid box must satisfy lower < upper in dimension " +
                              std::to_string(k));
    if (bins[k] < 1)
      throw ContractViolation("grid needs at least one bin per dimension");
  }
}

namespace {

double cell_volume_of(const GridSpec& spec) {
  double vol = 1.0;
  for (std::size_t k = 0; k < spec.box.size(); ++k)
    vol *= (spec.box[k].second - spec.box[k].first) / spec.bins[k];
  return vol;
}

}  // namespace

HistogramGrid weighted_histogram(const WeightedSample& sample, const GridSpec& spec) {
  spec.validate();
  const int d = spec.dimension();
  const std::vector<double> w = normalized_weights(sample);

  HistogramGrid hist;
  hist.spec = spec;
  hist.cell_volume = cell_volume_of(spec);
  hist.values.assign(spec.cell_count(), 0.0);

  for (std::size_t i = 0; i < sample.particles.size(); ++i) {
    const auto& theta = sample.particles[i].theta;
    if (static_cast<int>(theta.size()) != d)
      throw ContractViolation("particle dimension does not match grid");
    std::size_t idx = 0;
    for (int k = 0; k < d; ++k) {
      const auto& [lo, hi] = spec.box[k];
      if (theta[k] < lo || theta[k] > hi)
        throw ContractViolation("particle outside the histogram box");
      int cell = static_cast<int>((theta[k] - lo) / (hi - lo) * spec.bins[k]);
      cell = std::min(cell, spec.bins[k] - 1);  // upper edge goes to the last bin
      idx = idx * spec.bins[k] + cell;
    }
    hist.values[idx] += w[i];
  }
  for (double& v : hist.values) v /= hist.cell_volume;
  return hist;
}

namespace {

// average of `f` over the cell with multi-index `cell`, midpoint rule with
// `sub` points per dimension
double cell_average(const GridSpec& spec, const std::vector<int>& cell,
                    const DensityFn& f, int sub) {
  const int d = spec.dimension();
  std::vector<double> lo(d), step(d);
  for (int k = 0; k < d; ++k) {
    const double width = (spec.box[k].second - spec.box[k].first) / spec.bins[k];
    lo[k] = spec.box[k].first + cell[k] * width;
    step[k] = width / sub;
  }
  std::vector<int> sub_idx(d, 0);
  ParamVector point(d);
  double total = 0.0;
  std::size_t n_points = 1;
  for (int k = 0; k < d; ++k) n_points *= static_cast<std::size_t>(sub);
  for (std::size_t p = 0; p < n_points; ++p) {
    for (int k = 0; k < d; ++k) point[k] = lo[k] + (sub_idx[k] + 0.5) * step[k];
    total += f(point);
    for (int k = d - 1; k >= 0; --k) {
      if (++sub_idx[k] < sub) break;
      sub_idx[k] = 0;
    }
  }
  return total / static_cast<double>(n_points);
}

}  // namespace

double l2_distance(const HistogramGrid& hist, const DensityFn& exact, int subpoints) {
  hist.spec.validate();
  if (subpoints < 1) throw ContractViolation("l2_distance needs subpoints >= 1");
  const int d = hist.spec.dimension();
  std::vector<int> cell(d, 0);
  double sum_sq = 0.0;
  for (std::size_t idx = 0; idx < hist.values.size(); ++idx) {
    const double e = cell_average(hist.spec, cell, exact, subpoints);
    const double diff = hist.values[idx] - e;
    sum_sq += diff * diff * hist.cell_volume;
    for (int k = d - 1; k >= 0; --k) {
      if (++cell[k] < hist.spec.bins[k]) break;
      cell[k] = 0;
    }
  }
  return std::sqrt(sum_sq);
}

std::int64_t distinct_count(const WeightedSample& sample) {
  std::vector<std::vector<std::uint64_t>> keys;
  keys.reserve(sample.particles.size());
  for (const auto& p : sample.particles) {
    std::vector<std::uint64_t> key(p.theta.size());
    for (std::size_t k = 0; k < p.theta.size(); ++k)
      key[k] = std::bit_cast<std::uint64_t>(p.theta[k]);
    keys.push_back(std::move(key));
  }
  std::sort(keys.begin(), keys.end());
  return static_cast<std::int64_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

double efficiency_criterion(std::uint64_t n_sims, double l2) {
  if (l2 < 0.0) throw ContractViolation("efficiency_criterion needs l2 >= 0");
  return static_cast<double>(n_sims) * l2 * l2;
}

}  // namespace abcmc

#include "abcmc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace abcmc {

std::vector<ParamVector> latin_hypercube(const PriorSpec& prior, int n, RngStream& rng) {
  if (n <= 0) throw ContractViolation("latin_hypercube needs n >= 1");
  const int d = prior.dimension();
  std::vector<std::vector<int>> strata(d, std::vector<int>(n));
  for (int k = 0; k < d; ++k) {
    auto& perm = strata[k];
    std::iota(perm.begin(), perm.end(), 0);
    // Fisher-Yates driven by the stream
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform01() * (i + 1));
      std::swap(perm[i], perm[j]);
    }
  }
  std::vector<ParamVector> points(n, ParamVector(d));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) {
      const auto& [lo, hi] = prior.bounds()[k];
      points[i][k] = lo + (strata[k][i] + rng.uniform01()) * (hi - lo) / n;
    }
  return points;
}

double alpha_quantile(std::vector<double> values, double alpha) {
  if (values.empty()) throw ContractViolation("alpha_quantile of an empty multiset");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw ContractViolation("alpha_quantile needs alpha in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  // smallest k in [1, n] with k/n >= alpha
  std::size_t lo = 1, hi = n;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (static_cast<double>(mid) / static_cast<double>(n) >= alpha)
      hi = mid;
    else
      lo = mid + 1;
  }
  return values[lo - 1];
}

CumulativeWeights::CumulativeWeights(const WeightedSample& sample) {
  if (sample.particles.empty())
    throw ContractViolation("cannot pick from an empty sample");
  cumulative_.resize(sample.particles.size());
  double running = 0.0;
  for (std::size_t i = 0; i < cumulative_.size(); ++i) {
    const double w = sample.particles[i].weight;
    if (w < 0.0 || !std::isfinite(w))
      throw ContractViolation("particle weights must be finite and nonnegative");
    running += w;
    cumulative_[i] = running;
  }
  if (!(running > 0.0)) throw ContractViolation("total weight must be positive");
}

std::size_t CumulativeWeights::pick(RngStream& rng) const {
  const double u = rng.uniform01() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t i = it - cumulative_.begin();
  return std::min(i, cumulative_.size() - 1);
}

std::size_t weighted_pick(const WeightedSample& sample, RngStream& rng) {
  return CumulativeWeights(sample).pick(rng);
}

WeightedSample multinomial_resample(const WeightedSample& sample, int n, RngStream& rng) {
  if (n <= 0) throw ContractViolation("multinomial_resample needs n >= 1");
  const CumulativeWeights table(sample);
  WeightedSample out;
  out.epsilon = sample.epsilon;
  out.iteration = sample.iteration;
  out.particles.reserve(n);
  for (int i = 0; i < n; ++i) {
    Particle p = sample.particles[table.pick(rng)];
    p.weight = 1.0 / n;
    out.particles.push_back(std::move(p));
  }
  return out;
}

}  // namespace abcmc

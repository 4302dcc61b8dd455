#include "abcmc/core.hpp"

#include <cmath>

namespace abcmc {

BudgetExhausted::BudgetExhausted(std::uint64_t used_, std::uint64_t budget_)
    : std::runtime_error("simulation budget exhausted: " + std::to_string(used_) +
                         " of " + std::to_string(budget_)),
      used(used_),
      budget(budget_) {}

DegenerateKernel::DegenerateKernel(int dimension_)
    : std::runtime_error(dimension_ >= 0
                             ? "degenerate kernel: zero variance in dimension " +
                                   std::to_string(dimension_)
                             : "degenerate kernel: scale matrix not positive definite"),
      dimension(dimension_) {}

PriorSpec::PriorSpec(std::vector<std::pair<double, double>> bounds)
    : bounds_(std::move(bounds)) {
  if (bounds_.empty()) throw ContractViolation("prior needs at least one dimension");
  volume_ = 1.0;
  for (std::size_t k = 0; k < bounds_.size(); ++k) {
    const auto& [lo, hi] = bounds_[k];
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw ContractViolation("prior bounds must satisfy lower < upper in dimension " +
                              std::to_string(k));
    volume_ *= hi - lo;
  }
}

bool PriorSpec::contains(const ParamVector& theta) const {
  if (theta.size() != bounds_.size())
    throw ContractViolation("theta dimension does not match prior");
  for (std::size_t k = 0; k < bounds_.size(); ++k)
    if (theta[k] < bounds_[k].first || theta[k] > bounds_[k].second) return false;
  return true;
}

double PriorSpec::density(const ParamVector& theta) const {
  return contains(theta) ? 1.0 / volume_ : 0.0;
}

ParamVector PriorSpec::sample_one(RngStream& rng) const {
  ParamVector theta(bounds_.size());
  for (std::size_t k = 0; k < bounds_.size(); ++k)
    theta[k] = rng.uniform(bounds_[k].first, bounds_[k].second);
  return theta;
}

std::vector<ParamVector> prior_sample(const PriorSpec& prior, int n, RngStream& rng) {
  if (n <= 0) throw ContractViolation("prior_sample needs n >= 1");
  std::vector<ParamVector> draws;
  draws.reserve(n);
  for (int i = 0; i < n; ++i) draws.push_back(prior.sample_one(rng));
  return draws;
}

double total_weight(const WeightedSample& sample) {
  double total = 0.0;
  for (const auto& p : sample.particles) total += p.weight;
  return total;
}

std::vector<double> normalized_weights(const WeightedSample& sample) {
  const double total = total_weight(sample);
  if (!(total > 0.0)) throw ContractViolation("sample has no positive weight");
  std::vector<double> w(sample.particles.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = sample.particles[i].weight / total;
  return w;
}

}  // namespace abcmc

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "abcmc/sampling.hpp"

using namespace abcmc;

TEST_CASE("latin hypercube puts one point in every stratum of every dimension") {
  const PriorSpec prior({{-10.0, 10.0}, {0.0, 1.0}, {5.0, 9.0}});
  RngStream rng(17);
  const int n = 64;
  const auto points = latin_hypercube(prior, n, rng);
  REQUIRE(points.size() == n);
  for (int k = 0; k < 3; ++k) {
    const auto [lo, hi] = prior.bounds()[k];
    std::vector<int> hits(n, 0);
    for (const auto& p : points) {
      const int s = static_cast<int>((p[k] - lo) / (hi - lo) * n);
      REQUIRE(s >= 0);
      REQUIRE(s < n);
      ++hits[s];
    }
    for (int h : hits) CHECK(h == 1);
  }
}

TEST_CASE("latin hypercube n = 1 degenerates to one prior draw") {
  const PriorSpec prior({{2.0, 4.0}});
  RngStream rng(3);
  const auto points = latin_hypercube(prior, 1, rng);
  REQUIRE(points.size() == 1);
  CHECK(points[0][0] >= 2.0);
  CHECK(points[0][0] < 4.0);
  CHECK_THROWS_AS(latin_hypercube(prior, 0, rng), ContractViolation);
}

TEST_CASE("alpha quantile picks the smallest member reaching the level") {
  // direct examples
  CHECK(alpha_quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == 2.0);
  CHECK(alpha_quantile({3.0, 1.0, 2.0, 4.0}, 0.51) == 3.0);
  CHECK(alpha_quantile({3.0, 1.0, 2.0, 4.0}, 0.25) == 1.0);
  CHECK(alpha_quantile({3.0, 1.0, 2.0, 4.0}, 1.0) == 4.0);
  CHECK(alpha_quantile({5.0}, 0.2) == 5.0);
  // ties collapse onto the same member
  CHECK(alpha_quantile({1.0, 2.0, 2.0, 9.0}, 0.6) == 2.0);
  CHECK_THROWS_AS(alpha_quantile({}, 0.5), ContractViolation);
  CHECK_THROWS_AS(alpha_quantile({1.0}, 0.0), ContractViolation);
  CHECK_THROWS_AS(alpha_quantile({1.0}, 1.5), ContractViolation);
}

TEST_CASE("alpha quantile agrees with a linear-scan oracle") {
  RngStream rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform01() * 40);
    std::vector<double> values(n);
    for (auto& v : values)
      v = std::floor(rng.uniform(-5.0, 5.0) * 4.0) / 4.0;  // force ties
    const double alpha = std::min(1.0, rng.uniform01() + 1e-12);

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double expected = sorted.back();
    for (int k = 1; k <= n; ++k)
      if (static_cast<double>(k) / n >= alpha) {
        expected = sorted[k - 1];
        break;
      }
    CHECK(alpha_quantile(values, alpha) == expected);
  }
}

TEST_CASE("weighted pick follows the weights") {
  WeightedSample sample;
  sample.particles = {{{0.0}, 1.0, 0}, {{1.0}, 0.0, 0}, {{2.0}, 3.0, 0}};
  RngStream rng(7);
  int counts[3] = {0, 0, 0};
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[weighted_pick(sample, rng)];
  CHECK(counts[1] == 0);  // zero weight is never chosen
  CHECK(std::abs(counts[0] / static_cast<double>(n) - 0.25) < 0.01);
  CHECK(std::abs(counts[2] / static_cast<double>(n) - 0.75) < 0.01);
}

TEST_CASE("weight table rejects bad input") {
  WeightedSample negative;
  negative.particles = {{{0.0}, -1.0, 0}};
  CHECK_THROWS_AS(CumulativeWeights{negative}, ContractViolation);
  WeightedSample zero;
  zero.particles = {{{0.0}, 0.0, 0}};
  CHECK_THROWS_AS(CumulativeWeights{zero}, ContractViolation);
  CHECK_THROWS_AS(CumulativeWeights{WeightedSample{}}, ContractViolation);
}

TEST_CASE("multinomial resample draws members with equal output weights") {
  WeightedSample sample;
  sample.particles = {{{0.0}, 0.1, 1.0}, {{1.0}, 0.9, 2.0}};
  sample.epsilon = 0.5;
  sample.iteration = 4;
  RngStream rng(11);
  const auto out = multinomial_resample(sample, 1000, rng);
  CHECK(out.size() == 1000);
  CHECK(out.epsilon == 0.5);
  CHECK(out.iteration == 4);
  int ones = 0;
  for (const auto& p : out.particles) {
    CHECK(p.weight == doctest::Approx(0.001));
    CHECK((p.theta[0] == 0.0 || p.theta[0] == 1.0));
    ones += p.theta[0] == 1.0 ? 1 : 0;
  }
  CHECK(ones > 850);  // expect ~900
  CHECK(ones < 950);
}

TEST_CASE("resample and pick share one selection rule") {
  WeightedSample sample;
  sample.particles = {{{0.0}, 0.3, 0}, {{1.0}, 0.5, 0}, {{2.0}, 0.2, 0}};
  RngStream pick_rng(123), resample_rng(123);
  const auto out = multinomial_resample(sample, 50, resample_rng);
  for (int i = 0; i < 50; ++i) {
    const auto j = weighted_pick(sample, pick_rng);
    CHECK(out.particles[i].theta[0] == sample.particles[j].theta[0]);
  }
}

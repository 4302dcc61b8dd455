#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "abcmc/core.hpp"
#include "abcmc/kernels.hpp"

namespace abcmc {

inline constexpr std::uint64_t kDefaultMaxSimulations = 100000000ULL;

enum class InitMode { Auto, Iid, LatinHypercube };

struct RejectionConfig {
  int n = 0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t max_simulations = kDefaultMaxSimulations;
  int workers = 0;  // 0: hardware concurrency
};

struct PmcConfig {
  int n = 0;
  std::vector<double> schedule;  // non-increasing tolerances, one per generation
  KernelKind kernel = KernelKind::UnivariateDiagonal;
  std::uint64_t seed = 0;
  std::uint64_t max_simulations = kDefaultMaxSimulations;
  int workers = 0;
};

struct RsmcConfig {
  int n = 0;
  double alpha = 0.5;  // fraction dropped and replenished per round
  double epsilon_initial = std::numeric_limits<double>::infinity();
  double epsilon_target = 0.0;
  double c = 0.01;    // target probability that a replenished particle never moves
  int r_init = 10;    // MH trials per particle in the first round
  KernelKind kernel = KernelKind::UnivariateDiagonal;
  std::uint64_t seed = 0;
  std::uint64_t max_simulations = kDefaultMaxSimulations;
  int workers = 0;
};

struct SmcConfig {
  int n = 0;
  int m = 1;           // stored simulations per particle
  double alpha = 0.95; // per-iteration ESS retention
  double epsilon_target = 0.0;
  int n_t = 0;         // resampling threshold; 0 means n/2
  KernelKind kernel = KernelKind::UnivariateDiagonal;
  std::uint64_t seed = 0;
  std::uint64_t max_simulations = kDefaultMaxSimulations;
  int workers = 0;
};

struct ApmcConfig {
  int n = 0;
  double alpha = 0.5;      // survivor fraction per iteration
  double p_acc_min = 0.01; // stop once the fresh-proposal acceptance rate falls to this
  KernelKind kernel = KernelKind::UnivariateDiagonal;
  InitMode init = InitMode::Auto;  // Auto: i.i.d. in 1-d, Latin hypercube otherwise
  std::uint64_t seed = 0;
  std::uint64_t max_simulations = kDefaultMaxSimulations;
  int workers = 0;
};

struct RunResult {
  WeightedSample sample;
  RunTrace trace;
};

/// Called after every iteration with the current population and its record.
using IterationObserver =
    std::function<void(const WeightedSample&, const IterationRecord&)>;

/// Effective sample size (sum w)^2 / sum w^2; scale-invariant.
double ess(const std::vector<double>& weights);

/// Fraction of distances strictly below epsilon_prev.
double p_acc(const std::vector<double>& distances, double epsilon_prev);

/// Replenishment trial count ceil(log(c) / log(1 - pacc)), clamped to >= 1.
std::int64_t rsmc_update_r(double c, double pacc);

/// Geometric tolerance ladder from first down to last, inclusive.
std::vector<double> geometric_schedule(double first, double last, int levels);

RunResult run_rejection(const PriorSpec& prior, const SimulatorInterface& simulator,
                        const RejectionConfig& config,
                        const IterationObserver& observer = {});
RunResult run_pmc(const PriorSpec& prior, const SimulatorInterface& simulator,
                  const PmcConfig& config, const IterationObserver& observer = {});
RunResult run_rsmc(const PriorSpec& prior, const SimulatorInterface& simulator,
                   const RsmcConfig& config, const IterationObserver& observer = {});
RunResult run_smc(const PriorSpec& prior, const SimulatorInterface& simulator,
                  const SmcConfig& config, const IterationObserver& observer = {});
RunResult run_apmc(const PriorSpec& prior, const SimulatorInterface& simulator,
                   const ApmcConfig& config, const IterationObserver& observer = {});

}  // namespace abcmc

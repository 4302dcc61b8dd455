#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace abcmc {

using ParamVector = std::vector<double>;

/// Thrown when an operation's input contract is broken.
struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a run would exceed its total-simulation cap.
struct BudgetExhausted : std::runtime_error {
  BudgetExhausted(std::uint64_t used_, std::uint64_t budget_);
  std::uint64_t used;
  std::uint64_t budget;
};

/// Thrown when a perturbation kernel collapses (zero variance or a scale
/// matrix that is not positive definite).
struct DegenerateKernel : std::runtime_error {
  explicit DegenerateKernel(int dimension_);
  int dimension;  // offending dimension, -1 when not attributable to one
};

/// Thrown after three consecutive zero-acceptance replenishment rounds.
struct StagnationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic random stream. Streams are derived from (seed, iteration,
/// particle) keys so per-particle work can run on any number of threads and
/// still produce bit-identical results.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key);

  static RngStream derive(std::uint64_t seed, std::uint64_t iteration,
                          std::uint64_t particle);

  double uniform01();                    // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double gaussian();                     // standard normal
  std::uint64_t next_u64();

 private:
  std::mt19937_64 engine_;
};

/// Stable 64-bit key mix used for seed derivation everywhere.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Independent uniform prior over an axis-aligned box.
class PriorSpec {
 public:
  explicit PriorSpec(std::vector<std::pair<double, double>> bounds);

  int dimension() const { return static_cast<int>(bounds_.size()); }
  const std::vector<std::pair<double, double>>& bounds() const { return bounds_; }
  double volume() const { return volume_; }

  bool contains(const ParamVector& theta) const;
  /// 1/volume inside the box, 0 outside.
  double density(const ParamVector& theta) const;
  ParamVector sample_one(RngStream& rng) const;

 private:
  std::vector<std::pair<double, double>> bounds_;
  double volume_;
};

/// n i.i.d. prior draws.
std::vector<ParamVector> prior_sample(const PriorSpec& prior, int n, RngStream& rng);

struct Particle {
  ParamVector theta;
  double weight = 1.0;
  double distance = 0.0;
};

/// Particle population together with the tolerance it was selected at.
struct WeightedSample {
  std::vector<Particle> particles;
  double epsilon = std::numeric_limits<double>::infinity();
  int iteration = 0;

  std::size_t size() const { return particles.size(); }
};

double total_weight(const WeightedSample& sample);
/// Weights scaled to sum to one; errors when the total is not positive.
std::vector<double> normalized_weights(const WeightedSample& sample);

/// A stochastic simulator reduced to the scalar discrepancy between its
/// output and the observed data. distance() must be a pure function of
/// (theta, stream state).
class SimulatorInterface {
 public:
  virtual ~SimulatorInterface() = default;
  virtual double distance(const ParamVector& theta, RngStream& rng) const = 0;
};

/// One per-iteration diagnostics row.
struct IterationRecord {
  int iteration = 0;
  double epsilon = 0.0;
  /// p_acc for the adaptive samplers, plain acceptance rate otherwise.
  double accept_rate = 0.0;
  std::uint64_t cum_simulations = 0;
  std::int64_t distinct = 0;
  double ess = 0.0;
  double wall_seconds = 0.0;  // since run start
  std::int64_t r_used = 0;    // MH trials per replenished particle this round
  bool resampled = false;     // multinomial resampling happened this iteration
  std::string note;           // non-empty when a warning was recorded
};

struct RunTrace {
  std::vector<IterationRecord> records;
  std::uint64_t total_simulations = 0;
  std::uint64_t weight_underflows = 0;
};

}  // namespace abcmc

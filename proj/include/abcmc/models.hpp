#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "abcmc/core.hpp"
#include "abcmc/metrics.hpp"

namespace abcmc {

/// One draw from the two-component toy observation model
/// x ~ 0.5 N(theta, 1/100) + 0.5 N(theta, 1), returned as the discrepancy
/// |x| against the observation y = 0.
double toy_simulate(double theta, RngStream& rng);

/// Exact posterior density for the toy model on the prior box [-10, 10],
/// normalized by quadrature.
double toy_exact_posterior(double theta);

class ToyModel : public SimulatorInterface {
 public:
  double distance(const ParamVector& theta, RngStream& rng) const override;
  static PriorSpec prior() { return PriorSpec({{-10.0, 10.0}}); }
};

enum class DiscrepancyKind { AbsoluteDifference, ChiSquare };

/// One summary-statistic channel: its observed value(s), the discrepancy it
/// uses, and the normalization scale applied before the infinity norm.
struct StatChannel {
  std::string name;
  std::vector<double> observed;
  DiscrepancyKind kind = DiscrepancyKind::AbsoluteDifference;
  double scale = 1.0;
};

/// Raw (unnormalized) discrepancy between a simulated channel value and the
/// channel's observation: L1 distance, or the chi-square statistic
/// sum((s_b - o_b)^2 / o_b) for binned channels.
double channel_discrepancy(const StatChannel& channel, const std::vector<double>& simulated);

/// max over channels of raw discrepancy / channel scale.
double infinity_norm_distance(const std::vector<StatChannel>& channels,
                              const std::vector<std::vector<double>>& simulated);

/// Simulators that expose per-channel raw statistics.
class MultiStatSimulator : public SimulatorInterface {
 public:
  virtual std::vector<std::vector<double>> simulate_raw(const ParamVector& theta,
                                                        RngStream& rng) const = 0;
  virtual const std::vector<StatChannel>& channels() const = 0;
};

/// Standard deviation of each channel's raw discrepancy over n_pilot
/// prior-predictive simulations; used to equalize channel variances.
/// Errors when a channel is constant over the pilot run.
std::vector<double> calibrate_channel_scales(const MultiStatSimulator& simulator,
                                             const PriorSpec& prior, int n_pilot,
                                             RngStream& rng);

/// Four-parameter synthetic model with eight noisy statistic channels at two
/// observation horizons (a scalar size, a 3-bin age mix, a 3-bin household
/// mix and a scalar migration balance per horizon). The functional forms are
/// documented constants in the implementation; observations are the
/// noise-free channel values at the ground truth. Channel scales come from a
/// fixed-seed pilot calibration, so the distance is reproducible.
class SyntheticMultiStatModel : public MultiStatSimulator {
 public:
  SyntheticMultiStatModel();

  double distance(const ParamVector& theta, RngStream& rng) const override;
  std::vector<std::vector<double>> simulate_raw(const ParamVector& theta,
                                                RngStream& rng) const override;
  const std::vector<StatChannel>& channels() const override { return channels_; }

  static PriorSpec prior();
  const ParamVector& ground_truth() const { return truth_; }

 private:
  std::vector<StatChannel> channels_;
  ParamVector truth_;
};

/// Everything the harness needs to run a registered model by name.
struct ModelInfo {
  std::string name;
  PriorSpec prior;
  std::shared_ptr<const SimulatorInterface> simulator;
  std::function<double(double)> exact_density;  // null when no closed form (1-d only)
  GridSpec default_grid;
  ParamVector ground_truth;  // empty when not synthetic
};

const ModelInfo& find_model(const std::string& name);
std::vector<std::string> model_names();

}  // namespace abcmc

#include "abcmc/models.hpp"

#include <cmath>

namespace abcmc {
namespace {

double phi(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI); }

double toy_unnormalized(double theta) {
  if (theta < -10.0 || theta > 10.0) return 0.0;
  return 0.5 * (10.0 * phi(10.0 * theta) + phi(theta));
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double toy_simulate(double theta, RngStream& rng) {
  const double sd = rng.uniform01() < 0.5 ? 0.1 : 1.0;
  return std::abs(theta + sd * rng.gaussian());
}

double toy_exact_posterior(double theta) {
  // normalizer computed once; analytically it is within 1e-15 of 1
  static const double z = integrate(toy_unnormalized, -10.0, 10.0, 1e-13);
  return toy_unnormalized(theta) / z;
}

double ToyModel::distance(const ParamVector& theta, RngStream& rng) const {
  if (theta.size() != 1) throw ContractViolation("toy model is one-dimensional");
  return toy_simulate(theta[0], rng);
}

double channel_discrepancy(const StatChannel& channel, const std::vector<double>& simulated) {
  if (simulated.size() != channel.observed.size())
    throw ContractViolation("channel '" + channel.name + "': simulated size mismatch");
  if (channel.kind == DiscrepancyKind::AbsoluteDifference) {
    double total = 0.0;
    for (std::size_t b = 0; b < simulated.size(); ++b)
      total += std::abs(simulated[b] - channel.observed[b]);
    return total;
  }
  double total = 0.0;
  for (std::size_t b = 0; b < simulated.size(); ++b) {
    const double o = channel.observed[b];
    if (!(o > 0.0))
      throw ContractViolation("channel '" + channel.name +
                              "': chi-square bins need positive observations");
    const double diff = simulated[b] - o;
    total += diff * diff / o;
  }
  return total;
}

double infinity_norm_distance(const std::vector<StatChannel>& channels,
                              const std::vector<std::vector<double>>& simulated) {
  if (channels.empty()) throw ContractViolation("no channels");
  if (simulated.size() != channels.size())
    throw ContractViolation("simulated channel count mismatch");
  double worst = 0.0;
  for (std::size_t m = 0; m < channels.size(); ++m) {
    if (!(channels[m].scale > 0.0))
      throw ContractViolation("channel '" + channels[m].name + "' has no positive scale");
    worst = std::max(worst, channel_discrepancy(channels[m], simulated[m]) / channels[m].scale);
  }
  return worst;
}

std::vector<double> calibrate_channel_scales(const MultiStatSimulator& simulator,
                                             const PriorSpec& prior, int n_pilot,
                                             RngStream& rng) {
  if (n_pilot < 2) throw ContractViolation("calibration needs n_pilot >= 2");
  const auto& channels = simulator.channels();
  std::vector<std::vector<double>> discrepancies(channels.size());
  for (int i = 0; i < n_pilot; ++i) {
    const ParamVector theta = prior.sample_one(rng);
    const auto raw = simulator.simulate_raw(theta, rng);
    for (std::size_t m = 0; m < channels.size(); ++m)
      discrepancies[m].push_back(channel_discrepancy(channels[m], raw[m]));
  }
  std::vector<double> scales(channels.size());
  for (std::size_t m = 0; m < channels.size(); ++m) {
    double mean = 0.0;
    for (double v : discrepancies[m]) mean += v;
    mean /= n_pilot;
    double var = 0.0;
    for (double v : discrepancies[m]) var += (v - mean) * (v - mean);
    var /= n_pilot;
    if (!(var > 0.0))
      throw ContractViolation("channel '" + channels[m].name +
                              "' is constant over the pilot run");
    scales[m] = std::sqrt(var);
  }
  return scales;
}

namespace {

// Synthetic model internals. Parameters are standardized to roughly [-1, 1]:
//   u = (theta1 - 2) / 2, v = (theta2 - 0.5) / 0.5,
//   w = (theta3 - 0.5) / 0.5, z = (theta4 - 0.25) / 0.25
// The two size channels share most of their (u, z) direction, which is what
// leaves those two parameters mildly correlated in the posterior; the mix
// channels pin u and w, the migration channels pin v.
constexpr std::uint64_t kPilotSeed = 0x5e1fca1bULL;
constexpr int kPilotRuns = 1000;

struct Standardized {
  double u, v, w, z;
};

Standardized standardize(const ParamVector& theta) {
  return {(theta[0] - 2.0) / 2.0, (theta[1] - 0.5) / 0.5, (theta[2] - 0.5) / 0.5,
          (theta[3] - 0.25) / 0.25};
}

std::vector<double> softmax3(double a, double b, double c) {
  const double m = std::max(a, std::max(b, c));
  const double ea = std::exp(a - m), eb = std::exp(b - m), ec = std::exp(c - m);
  const double s = ea + eb + ec;
  return {ea / s, eb / s, ec / s};
}

// noise-free channel values
std::vector<std::vector<double>> synthetic_latent(const Standardized& s) {
  std::vector<std::vector<double>> values(8);
  values[0] = {100.0 + 30.0 * s.u - 12.0 * s.z + 5.0 * s.v};
  values[1] = softmax3(0.5 * s.u - 0.3 * s.z, 0.2 * s.w, -0.4 * s.u + 0.1 * s.v);
  values[2] = softmax3(0.6 * s.w + 0.2 * s.v, -0.5 * s.w, 0.3 * s.v - 0.2 * s.u);
  values[3] = {5.0 * s.v - 2.0 * s.w + 0.8 * s.u * s.v};
  values[4] = {100.0 + 55.0 * s.u - 20.0 * s.z + 9.0 * s.v + 2.0 * s.u * s.u};
  values[5] = softmax3(0.8 * s.u - 0.5 * s.z, 0.35 * s.w, -0.6 * s.u + 0.15 * s.v);
  values[6] = softmax3(0.9 * s.w + 0.3 * s.v, -0.7 * s.w + 0.1 * s.z, 0.5 * s.v - 0.3 * s.u);
  values[7] = {8.0 * s.v - 3.0 * s.w + 1.2 * s.u * s.v};
  return values;
}

constexpr double kNoiseSd[8] = {2.0, 0.01, 0.01, 0.3, 3.0, 0.012, 0.012, 0.4};

const char* kChannelNames[8] = {"size_early",      "age_mix_early",
                                "household_early", "migration_early",
                                "size_late",       "age_mix_late",
                                "household_late",  "migration_late"};

constexpr DiscrepancyKind kChannelKinds[8] = {
    DiscrepancyKind::AbsoluteDifference, DiscrepancyKind::ChiSquare,
    DiscrepancyKind::ChiSquare,          DiscrepancyKind::AbsoluteDifference,
    DiscrepancyKind::AbsoluteDifference, DiscrepancyKind::ChiSquare,
    DiscrepancyKind::ChiSquare,          DiscrepancyKind::AbsoluteDifference};

}  // namespace

SyntheticMultiStatModel::SyntheticMultiStatModel() : truth_{2.0, 0.5, 0.5, 0.25} {
  const auto observed = synthetic_latent(standardize(truth_));
  channels_.resize(8);
  for (int m = 0; m < 8; ++m) {
    channels_[m].name = kChannelNames[m];
    channels_[m].observed = observed[m];
    channels_[m].kind = kChannelKinds[m];
    channels_[m].scale = 1.0;
  }
  RngStream pilot(kPilotSeed);
  const auto scales = calibrate_channel_scales(*this, prior(), kPilotRuns, pilot);
  for (int m = 0; m < 8; ++m) channels_[m].scale = scales[m];
}

PriorSpec SyntheticMultiStatModel::prior() {
  return PriorSpec({{0.0, 4.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 0.5}});
}

std::vector<std::vector<double>> SyntheticMultiStatModel::simulate_raw(
    const ParamVector& theta, RngStream& rng) const {
  if (theta.size() != 4) throw ContractViolation("synthetic model takes four parameters");
  auto values = synthetic_latent(standardize(theta));
  for (std::size_t m = 0; m < values.size(); ++m)
    for (double& v : values[m]) v += kNoiseSd[m] * rng.gaussian();
  return values;
}

double SyntheticMultiStatModel::distance(const ParamVector& theta, RngStream& rng) const {
  return infinity_norm_distance(channels_, simulate_raw(theta, rng));
}

namespace {

std::vector<ModelInfo> build_registry() {
  std::vector<ModelInfo> models;
  {
    ModelInfo toy{.name = "toy",
                  .prior = ToyModel::prior(),
                  .simulator = std::make_shared<ToyModel>(),
                  .exact_density = [](double t) { return toy_exact_posterior(t); },
                  .default_grid = GridSpec{{{-10.0, 10.0}}, {300}},
                  .ground_truth = {}};
    models.push_back(std::move(toy));
  }
  {
    auto sim = std::make_shared<SyntheticMultiStatModel>();
    ModelInfo synth{.name = "synthetic4",
                    .prior = SyntheticMultiStatModel::prior(),
                    .simulator = sim,
                    .exact_density = nullptr,
                    .default_grid =
                        GridSpec{{{0.0, 4.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 0.5}},
                                 {4, 4, 4, 4}},
                    .ground_truth = sim->ground_truth()};
    models.push_back(std::move(synth));
  }
  return models;
}

const std::vector<ModelInfo>& registry() {
  static const std::vector<ModelInfo> models = build_registry();
  return models;
}

}  // namespace

const ModelInfo& find_model(const std::string& name) {
  for (const auto& m : registry())
    if (m.name == name) return m;
  std::string known;
  for (const auto& m : registry()) known += (known.empty() ? "" : ", ") + m.name;
  throw ContractViolation("unknown model '" + name + "' (known: " + known + ")");
}

std::vector<std::string> model_names() {
  std::vector<std::string> names;
  for (const auto& m : registry()) names.push_back(m.name);
  return names;
}

}  // namespace abcmc

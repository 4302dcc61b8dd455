#include "abcmc/kernels.hpp"

#include <cmath>

namespace abcmc {

std::pair<Eigen::VectorXd, Eigen::MatrixXd> weighted_moments(const WeightedSample& sample) {
  if (sample.particles.empty()) throw ContractViolation("weighted_moments of empty sample");
  const int d = static_cast<int>(sample.particles.front().theta.size());
  const std::vector<double> w = normalized_weights(sample);

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < sample.particles.size(); ++i) {
    const auto& theta = sample.particles[i].theta;
    if (static_cast<int>(theta.size()) != d)
      throw ContractViolation("mixed particle dimensions in sample");
    for (int k = 0; k < d; ++k) mean[k] += w[i] * theta[k];
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < sample.particles.size(); ++i) {
    const auto& theta = sample.particles[i].theta;
    for (int r = 0; r < d; ++r)
      for (int c = 0; c <= r; ++c)
        cov(r, c) += w[i] * (theta[r] - mean[r]) * (theta[c] - mean[c]);
  }
  for (int r = 0; r < d; ++r)
    for (int c = r + 1; c < d; ++c) cov(r, c) = cov(c, r);
  return {mean, cov};
}

KernelSpec make_kernel(Eigen::MatrixXd scale, KernelKind kind) {
  const int d = static_cast<int>(scale.rows());
  if (d == 0 || scale.cols() != d)
    throw ContractViolation("kernel scale must be a square matrix");
  for (int k = 0; k < d; ++k)
    if (!(scale(k, k) > 0.0)) throw DegenerateKernel(k);
  if (kind == KernelKind::UnivariateDiagonal) {
    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < d; ++k) diag(k, k) = scale(k, k);
    scale = std::move(diag);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success) throw DegenerateKernel(-1);

  KernelSpec kernel;
  kernel.kind = kind;
  kernel.scale = std::move(scale);
  kernel.chol = llt.matrixL();
  double det_l = 1.0;
  for (int k = 0; k < d; ++k) det_l *= kernel.chol(k, k);
  kernel.norm_const = std::pow(2.0 * M_PI, 0.5 * d) * det_l;
  return kernel;
}

KernelSpec kernel_from_sample(const WeightedSample& sample, KernelKind kind) {
  auto [mean, cov] = weighted_moments(sample);
  return make_kernel(2.0 * cov, kind);
}

ParamVector perturb(const ParamVector& seed_theta, const KernelSpec& kernel, RngStream& rng) {
  const int d = kernel.dimension();
  if (static_cast<int>(seed_theta.size()) != d)
    throw ContractViolation("perturb: theta dimension does not match kernel");
  ParamVector out = seed_theta;
  if (kernel.kind == KernelKind::UnivariateDiagonal) {
    for (int k = 0; k < d; ++k)
      out[k] += std::sqrt(kernel.scale(k, k)) * rng.gaussian();
    return out;
  }
  Eigen::VectorXd z(d);
  for (int k = 0; k < d; ++k) z[k] = rng.gaussian();
  for (int r = 0; r < d; ++r) {
    double shift = 0.0;
    for (int c = 0; c <= r; ++c) shift += kernel.chol(r, c) * z[c];
    out[r] += shift;
  }
  return out;
}

namespace {

// squared Mahalanobis norm via forward substitution against the cached factor
double quad_form(const KernelSpec& kernel, const double* diff, double* work) {
  const int d = kernel.dimension();
  double q = 0.0;
  for (int r = 0; r < d; ++r) {
    double y = diff[r];
    for (int c = 0; c < r; ++c) y -= kernel.chol(r, c) * work[c];
    y /= kernel.chol(r, r);
    work[r] = y;
    q += y * y;
  }
  return q;
}

}  // namespace

double proposal_density(const ParamVector& theta, const WeightedSample& sample,
                        const KernelSpec& kernel) {
  const int d = kernel.dimension();
  if (static_cast<int>(theta.size()) != d)
    throw ContractViolation("proposal_density: theta dimension does not match kernel");
  const std::vector<double> w = normalized_weights(sample);

  if (d == 1) {
    // scalar path: sum_j w_j * phi((theta - theta_j)/sigma) / sigma
    const double sigma = kernel.chol(0, 0);
    const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
    double density = 0.0;
    for (std::size_t j = 0; j < sample.particles.size(); ++j) {
      const double u = (theta[0] - sample.particles[j].theta[0]) / sigma;
      density += w[j] * inv_norm * std::exp(-0.5 * u * u);
    }
    return density;
  }

  std::vector<double> diff(d), work(d);
  double density = 0.0;
  for (std::size_t j = 0; j < sample.particles.size(); ++j) {
    const auto& mu = sample.particles[j].theta;
    for (int k = 0; k < d; ++k) diff[k] = theta[k] - mu[k];
    const double q = quad_form(kernel, diff.data(), work.data());
    density += w[j] * std::exp(-0.5 * q) / kernel.norm_const;
  }
  return density;
}

WeightResult apmc_weight_checked(const ParamVector& theta, const WeightedSample& sample,
                                 const KernelSpec& kernel, const PriorSpec& prior) {
  const double pi = prior.density(theta);
  if (pi == 0.0) return {0.0, false};
  const double d = proposal_density(theta, sample, kernel);
  if (d <= 0.0) return {0.0, true};  // underflow under a positive prior
  return {pi / d, false};
}

double apmc_weight(const ParamVector& theta, const WeightedSample& sample,
                   const KernelSpec& kernel, const PriorSpec& prior) {
  return apmc_weight_checked(theta, sample, kernel, prior).value;
}

double pmc_weight(const ParamVector& theta, const WeightedSample& sample,
                  const KernelSpec& kernel, const PriorSpec& prior) {
  return apmc_weight_checked(theta, sample, kernel, prior).value;
}

}  // namespace abcmc

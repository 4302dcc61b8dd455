#pragma once

#include <Eigen/Dense>
#include <utility>

#include "abcmc/core.hpp"

namespace abcmc {

enum class KernelKind { UnivariateDiagonal, MultivariateFull };

/// Gaussian perturbation kernel. `scale` is a covariance matrix; the
/// univariate-diagonal variant carries a diagonal scale. The Cholesky factor
/// is cached at construction, which is where degeneracy is rejected.
struct KernelSpec {
  KernelKind kind = KernelKind::UnivariateDiagonal;
  Eigen::MatrixXd scale;
  Eigen::MatrixXd chol;      // lower triangular, chol * chol^T == scale
  double norm_const = 0.0;   // (2 pi)^(d/2) * det(chol)

  int dimension() const { return static_cast<int>(scale.rows()); }
};

/// Weighted mean and biased weighted covariance of a sample.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> weighted_moments(const WeightedSample& sample);

/// Build a kernel from an explicit covariance; throws DegenerateKernel when
/// a diagonal entry is not strictly positive or the matrix has no Cholesky
/// factorization.
KernelSpec make_kernel(Eigen::MatrixXd scale, KernelKind kind);

/// Kernel with scale = twice the weighted covariance of the sample (full
/// matrix, or its diagonal for the univariate variant).
KernelSpec kernel_from_sample(const WeightedSample& sample, KernelKind kind);

/// One Gaussian perturbation of `seed_theta`.
ParamVector perturb(const ParamVector& seed_theta, const KernelSpec& kernel, RngStream& rng);

/// Mixture density of the kernel centred at every particle of `sample`,
/// weighted by the sample's normalized weights, evaluated at theta.
double proposal_density(const ParamVector& theta, const WeightedSample& sample,
                        const KernelSpec& kernel);

struct WeightResult {
  double value = 0.0;
  bool underflow = false;  // proposal density vanished under a positive prior
};

/// Importance weight prior(theta) / proposal_density(theta, ...). The ratio
/// is deliberately left unnormalized so weights stay on a scale comparable
/// across iterations; the initial generation's weights are 1 by the same
/// convention (its proposal is the prior itself).
WeightResult apmc_weight_checked(const ParamVector& theta, const WeightedSample& sample,
                                 const KernelSpec& kernel, const PriorSpec& prior);
double apmc_weight(const ParamVector& theta, const WeightedSample& sample,
                   const KernelSpec& kernel, const PriorSpec& prior);

/// Same ratio as apmc_weight; PMC renormalizes per generation, so any common
/// factor cancels.
double pmc_weight(const ParamVector& theta, const WeightedSample& sample,
                  const KernelSpec& kernel, const PriorSpec& prior);

}  // namespace abcmc

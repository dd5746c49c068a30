#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "blade/rng.hpp"

namespace blade {

// ||x - x*|| / ||x*||.
double rel_l2(const Eigen::VectorXd& x, const Eigen::VectorXd& x_star);

// Fair CRPS with 1/(2J(J-1)) pairwise coefficient, averaged over the n
// dimensions; computed per dimension with the sorted-sample form.
double crps(const Eigen::MatrixXd& ensemble, const Eigen::VectorXd& truth);

// Unbiased spread-skill ratio over a set of (ensemble, truth) cases.
double ssr(const std::vector<Eigen::MatrixXd>& ensembles,
           const std::vector<Eigen::VectorXd>& truths);

// Pooled rank histogram (J + 1 bins); ties broken uniformly at random.
std::vector<long> rank_histogram(
    const std::vector<Eigen::MatrixXd>& ensembles,
    const std::vector<Eigen::VectorXd>& truths, RngStream& rng);

// Sliced Wasserstein distance between two sample sets: 1-D W_p over L
// random sphere directions, larger set subsampled to equalize counts.
double sliced_wasserstein(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                          RngStream& rng, int n_projections = 128,
                          double order = 2.0);

// KL(N(mu, Sigma) || N(mu_star, Sigma_star)).
double kl_gaussian(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                   const Eigen::VectorXd& mu_star,
                   const Eigen::MatrixXd& sigma_star);

// Sample-moment KL against an analytic Gaussian; unbiased covariance
// estimate plus a 1e-9 ridge on the sample side.
double kl_gaussian_from_samples(const Eigen::MatrixXd& samples,
                                const Eigen::VectorXd& mu_star,
                                const Eigen::MatrixXd& sigma_star);

struct MetricsReport {
  std::optional<double> rel_l2;
  std::optional<double> crps;
  std::optional<double> ssr;
  std::optional<double> swd;
  std::optional<double> kl_gaussian;
  std::vector<long> rank_histogram;
};

}  // namespace blade

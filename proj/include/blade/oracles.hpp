#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "blade/prior.hpp"
#include "blade/rng.hpp"

namespace blade {

// Analytic posterior of a linear-Gaussian observation under a GMM prior:
// another Gaussian mixture with conjugately updated components.
struct GmmPosterior {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;

  int components() const { return static_cast<int>(weights.size()); }
  Eigen::Index dim() const { return means[0].size(); }

  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;  // full mixture covariance
};

GmmPosterior gmm_posterior(const GmmPrior& prior, const Eigen::MatrixXd& h,
                           const Eigen::MatrixXd& sigma_eps,
                           const Eigen::VectorXd& y);

Eigen::MatrixXd gmm_posterior_sample(const GmmPosterior& p, Eigen::Index count,
                                     RngStream& rng);

using LogDensity = std::function<double(const Eigen::VectorXd&)>;

struct RwmResult {
  Eigen::MatrixXd samples;  // thinned chain, row per sample
  double acceptance_rate;
  bool acceptance_warning;  // outside [0.1, 0.6]
};

// Random-walk Metropolis targeting exp(log_target); n <= 4.
RwmResult rwm_sample(const LogDensity& log_target, const Eigen::VectorXd& init,
                     long steps, double step_std, RngStream& rng,
                     long thin = 10, long burn_in = -1);

struct GridPosterior {
  Eigen::VectorXd lower, upper;       // bounds per dimension
  std::vector<int> resolution;        // cells per dimension
  Eigen::VectorXd probabilities;      // flattened, row-major, sums to 1
  Eigen::MatrixXd points;             // cell centers matching probabilities

  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;
  // Total probability of cells nearest (in Euclidean distance) to each anchor.
  std::vector<double> mass_near(const std::vector<Eigen::VectorXd>& anchors)
      const;
};

// Deterministic quadrature oracle on a regular grid; n <= 2. Throws if
// the boundary cells carry more than 1e-3 probability mass.
GridPosterior grid_posterior(const LogDensity& log_target,
                             const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper,
                             const std::vector<int>& resolution);

}  // namespace blade

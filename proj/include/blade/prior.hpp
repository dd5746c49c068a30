#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "blade/ensemble.hpp"
#include "blade/rng.hpp"

namespace blade {

// Noise-level-conditioned score function grad log p(x; sigma). Plays the
// role of a pretrained denoising model; here instances are analytic.
class PriorScore {
 public:
  virtual ~PriorScore() = default;

  // Batch evaluation: rows of x are points, returns matching score rows.
  virtual Eigen::MatrixXd score(const Eigen::MatrixXd& x,
                                double sigma) const = 0;
  virtual Eigen::Index dim() const = 0;
};

// Gaussian mixture prior with analytic noised score and log density.
class GmmPrior : public PriorScore {
 public:
  GmmPrior(std::vector<double> weights, std::vector<Eigen::VectorXd> means,
           std::vector<Eigen::MatrixXd> covariances);

  Eigen::MatrixXd score(const Eigen::MatrixXd& x, double sigma) const override;
  Eigen::Index dim() const override { return means_[0].size(); }

  // log of the sigma-convolved mixture density, one value per row of x.
  Eigen::VectorXd log_density(const Eigen::MatrixXd& x, double sigma) const;

  Eigen::MatrixXd sample(Eigen::Index count, RngStream& rng) const;

  int components() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& means() const { return means_; }
  const std::vector<Eigen::MatrixXd>& covariances() const {
    return covariances_;
  }

 private:
  std::vector<double> weights_;
  std::vector<Eigen::VectorXd> means_;
  std::vector<Eigen::MatrixXd> covariances_;
  std::vector<Eigen::MatrixXd> chol_;  // lower factors for sampling
};

struct ScoreSelfTestResult {
  bool pass;
  double max_deviation;
};

// Central finite differences of log_density vs the analytic score at
// randomized probe points.
ScoreSelfTestResult score_self_test(const GmmPrior& p, double sigma,
                                    double tol, RngStream& rng,
                                    int n_probes = 32);

}  // namespace blade

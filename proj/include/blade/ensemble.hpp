#pragma once

#include <string>

#include <Eigen/Core>

#include "blade/rng.hpp"

namespace blade {

// Ensemble of J particles in R^n, one particle per row.
struct Ensemble {
  Eigen::MatrixXd particles;  // J x n

  Ensemble() = default;
  explicit Ensemble(Eigen::MatrixXd p) : particles(std::move(p)) {}

  Eigen::Index size() const { return particles.rows(); }
  Eigen::Index dim() const { return particles.cols(); }
  bool finite() const { return particles.allFinite(); }
};

// n x J deviation matrix, column j = (z^(j) - mean) / sqrt(J).
// columns * columns^T reproduces the biased ensemble covariance.
struct EnsembleSqrt {
  Eigen::MatrixXd columns;  // n x J
};

Eigen::VectorXd ensemble_mean(const Ensemble& e);

// Biased (1/J) covariance estimate.
Eigen::MatrixXd ensemble_cov(const Ensemble& e);

// Per-dimension biased standard deviations.
Eigen::VectorXd ensemble_std(const Ensemble& e);

EnsembleSqrt ensemble_sqrt(const Ensemble& e);

// Per-particle noise sqrt(scale) * columns * xi with xi ~ N(0, I_J),
// so each row has covariance scale * C in expectation. Returns J x n.
Eigen::MatrixXd apply_sqrt_noise(const EnsembleSqrt& s, double scale,
                                 RngStream& rng);

// Accumulated orthonormal basis of particle deviations across updates;
// tracks the numerical rank of the explored subspace.
class SpanTracker {
 public:
  explicit SpanTracker(Eigen::Index dim) : dim_(dim) {}

  // Ingest the deviation vectors of e; singular values below
  // tol * largest count as zero.
  void update(const Ensemble& e, double tol = 1e-8);

  int rank() const { return rank_; }
  Eigen::Index dim() const { return dim_; }

 private:
  Eigen::Index dim_;
  Eigen::MatrixXd basis_;  // dim_ x rank_, orthonormal columns
  int rank_ = 0;
};

// CSV round-trip: one row per particle, header dim_0..dim_{n-1}.
void save_ensemble_csv(const Ensemble& e, const std::string& path);
Ensemble load_ensemble_csv(const std::string& path);

}  // namespace blade

#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "blade/ensemble.hpp"
#include "blade/prior.hpp"
#include "blade/rng.hpp"

namespace blade {

// Black-box forward map G: R^n -> R^m with batched evaluation only.
// No derivative or adjoint hook exists in this interface.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;

  // Row j of the result is G applied to row j of z. Bumps eval_count by
  // the number of rows.
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& z);

  virtual Eigen::Index in_dim() const = 0;
  virtual Eigen::Index out_dim() const = 0;

  std::int64_t eval_count() const { return eval_count_; }
  void reset_eval_count() { eval_count_ = 0; }

 protected:
  virtual Eigen::MatrixXd evaluate_impl(const Eigen::MatrixXd& z) const = 0;

 private:
  std::int64_t eval_count_ = 0;
};

struct Observation {
  Eigen::VectorXd y;
  double sigma_y;  // true observation-noise std, > 0
};

class LinearModel : public ForwardModel {
 public:
  explicit LinearModel(Eigen::MatrixXd h) : h_(std::move(h)) {}

  Eigen::Index in_dim() const override { return h_.cols(); }
  Eigen::Index out_dim() const override { return h_.rows(); }
  const Eigen::MatrixXd& matrix() const { return h_; }

 protected:
  Eigen::MatrixXd evaluate_impl(const Eigen::MatrixXd& z) const override {
    return z * h_.transpose();
  }

 private:
  Eigen::MatrixXd h_;
};

// G(z) = ||z||^2, scalar output.
class QuadraticModel : public ForwardModel {
 public:
  explicit QuadraticModel(Eigen::Index n) : n_(n) {}

  Eigen::Index in_dim() const override { return n_; }
  Eigen::Index out_dim() const override { return 1; }

 protected:
  Eigen::MatrixXd evaluate_impl(const Eigen::MatrixXd& z) const override {
    return z.rowwise().squaredNorm();
  }

 private:
  Eigen::Index n_;
};

// G(z) = |Hz| elementwise.
class AbsLinearModel : public ForwardModel {
 public:
  explicit AbsLinearModel(Eigen::MatrixXd h) : h_(std::move(h)) {}

  Eigen::Index in_dim() const override { return h_.cols(); }
  Eigen::Index out_dim() const override { return h_.rows(); }
  const Eigen::MatrixXd& matrix() const { return h_; }

 protected:
  Eigen::MatrixXd evaluate_impl(const Eigen::MatrixXd& z) const override {
    return (z * h_.transpose()).cwiseAbs();
  }

 private:
  Eigen::MatrixXd h_;
};

// f_j = ||G(z^(j)) - y||^2 / (2 sigma_y^2), one value per particle.
Eigen::VectorXd likelihood_potential(ForwardModel& fm, const Observation& obs,
                                     const Eigen::MatrixXd& z);

// A fully specified benchmark problem.
struct TestInstance {
  std::shared_ptr<ForwardModel> model;
  std::shared_ptr<GmmPrior> prior;
  Observation obs;
  Eigen::VectorXd ground_truth;
  std::string name;
  std::uint64_t seed;
};

// name in {linear-gaussian, linear-gmm4, quadratic-gmm, abs-linear}.
// Deterministic for a fixed (name, dims, seed).
TestInstance make_test_instance(const std::string& name, Eigen::Index n,
                                double sigma_y, std::uint64_t seed);

}  // namespace blade

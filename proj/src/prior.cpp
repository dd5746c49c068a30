#include "blade/prior.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace blade {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

}  // namespace

GmmPrior::GmmPrior(std::vector<double> weights,
                   std::vector<Eigen::VectorXd> means,
                   std::vector<Eigen::MatrixXd> covariances)
    : weights_(std::move(weights)),
      means_(std::move(means)),
      covariances_(std::move(covariances)) {
  if (weights_.empty() || weights_.size() != means_.size() ||
      weights_.size() != covariances_.size())
    throw std::invalid_argument("GmmPrior: inconsistent component counts");
  double total = 0.0;
  for (double w : weights_) {
    if (w < 0.0) throw std::invalid_argument("GmmPrior: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("GmmPrior: weights must sum to 1");
  for (const auto& cov : covariances_) {
    if (cov.rows() != means_[0].size() || cov.cols() != means_[0].size())
      throw std::invalid_argument("GmmPrior: covariance shape mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("GmmPrior: covariance not SPD");
    chol_.push_back(llt.matrixL());
  }
}

// Per-point log responsibilities and component-wise whitened residuals for
// the sigma-convolved mixture; shared by score and log_density.
Eigen::MatrixXd GmmPrior::score(const Eigen::MatrixXd& x, double sigma) const {
  const Eigen::Index n = dim();
  const Eigen::Index rows = x.rows();
  const int k_count = components();

  Eigen::MatrixXd log_resp(rows, k_count);
  std::vector<Eigen::MatrixXd> neg_grad(k_count);  // rows x n per component
  for (int i = 0; i < k_count; ++i) {
    Eigen::MatrixXd cov = covariances_[i];
    cov.diagonal().array() += sigma * sigma;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("GmmPrior::score: singular noised covariance");
    const double half_logdet =
        Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();

    const Eigen::MatrixXd diff = x.rowwise() - means_[i].transpose();
    // solve (cov) g = diff^T per point
    const Eigen::MatrixXd g = llt.solve(diff.transpose());  // n x rows
    neg_grad[i] = g.transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double quad = diff.row(r).dot(g.col(r));
      log_resp(r, i) = std::log(weights_[i]) - half_logdet -
                       0.5 * static_cast<double>(n) * kLog2Pi - 0.5 * quad;
    }
  }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, n);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double m = log_resp.row(r).maxCoeff();
    double denom = 0.0;
    for (int i = 0; i < k_count; ++i) denom += std::exp(log_resp(r, i) - m);
    for (int i = 0; i < k_count; ++i) {
      const double w = std::exp(log_resp(r, i) - m) / denom;
      out.row(r) -= w * neg_grad[i].row(r);
    }
  }
  return out;
}

Eigen::VectorXd GmmPrior::log_density(const Eigen::MatrixXd& x,
                                      double sigma) const {
  const Eigen::Index n = dim();
  const Eigen::Index rows = x.rows();
  const int k_count = components();

  Eigen::MatrixXd log_comp(rows, k_count);
  for (int i = 0; i < k_count; ++i) {
    Eigen::MatrixXd cov = covariances_[i];
    cov.diagonal().array() += sigma * sigma;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("GmmPrior: singular noised covariance");
    const double half_logdet =
        Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    const Eigen::MatrixXd diff = x.rowwise() - means_[i].transpose();
    const Eigen::MatrixXd g = llt.solve(diff.transpose());
    for (Eigen::Index r = 0; r < rows; ++r) {
      log_comp(r, i) = std::log(weights_[i]) - half_logdet -
                       0.5 * static_cast<double>(n) * kLog2Pi -
                       0.5 * diff.row(r).dot(g.col(r));
    }
  }
  Eigen::VectorXd out(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double m = log_comp.row(r).maxCoeff();
    double s = 0.0;
    for (int i = 0; i < k_count; ++i) s += std::exp(log_comp(r, i) - m);
    out(r) = m + std::log(s);
  }
  return out;
}

Eigen::MatrixXd GmmPrior::sample(Eigen::Index count, RngStream& rng) const {
  const Eigen::Index n = dim();
  Eigen::MatrixXd out(count, n);
  for (Eigen::Index r = 0; r < count; ++r) {
    const double u = rng.next_uniform();
    double acc = 0.0;
    int pick = components() - 1;
    for (int i = 0; i < components(); ++i) {
      acc += weights_[i];
      if (u <= acc) {
        pick = i;
        break;
      }
    }
    out.row(r) =
        (means_[pick] + chol_[pick] * rng.normal_vector(n)).transpose();
  }
  return out;
}

ScoreSelfTestResult score_self_test(const GmmPrior& p, double sigma, double tol,
                                    RngStream& rng, int n_probes) {
  const Eigen::Index n = p.dim();
  const double h = 1e-5;
  double max_dev = 0.0;
  // probe points spread over the mixture's support
  Eigen::MatrixXd probes = p.sample(n_probes, rng);
  probes += sigma * rng.normal_matrix(n_probes, n);

  const Eigen::MatrixXd analytic = p.score(probes, sigma);
  for (int r = 0; r < n_probes; ++r) {
    for (Eigen::Index d = 0; d < n; ++d) {
      Eigen::MatrixXd hi = probes.row(r);
      Eigen::MatrixXd lo = probes.row(r);
      hi(0, d) += h;
      lo(0, d) -= h;
      const double fd =
          (p.log_density(hi, sigma)(0) - p.log_density(lo, sigma)(0)) /
          (2.0 * h);
      const double scale = std::max(1.0, std::abs(analytic(r, d)));
      max_dev = std::max(max_dev, std::abs(fd - analytic(r, d)) / scale);
    }
  }
  return {max_dev <= tol, max_dev};
}

}  // namespace blade

#include "blade/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace blade {

double rel_l2(const Eigen::VectorXd& x, const Eigen::VectorXd& x_star) {
  const double denom = x_star.norm();
  if (denom == 0.0) throw std::invalid_argument("rel_l2: zero ground truth");
  return (x - x_star).norm() / denom;
}

double crps(const Eigen::MatrixXd& ensemble, const Eigen::VectorXd& truth) {
  const Eigen::Index j_count = ensemble.rows();
  const Eigen::Index n = ensemble.cols();
  if (j_count < 2)
    throw std::invalid_argument("crps: fair estimator needs J >= 2");
  if (truth.size() != n) throw std::invalid_argument("crps: dim mismatch");

  double total = 0.0;
  std::vector<double> sorted(j_count);
  for (Eigen::Index d = 0; d < n; ++d) {
    for (Eigen::Index j = 0; j < j_count; ++j) sorted[j] = ensemble(j, d);
    std::sort(sorted.begin(), sorted.end());

    double abs_err = 0.0;
    double pair_sum = 0.0;  // sum_i (2i + 1 - J) * s_i == 0.5 * sum |x_j - x_k|
    for (Eigen::Index j = 0; j < j_count; ++j) {
      abs_err += std::abs(sorted[j] - truth(d));
      pair_sum += (2.0 * j + 1.0 - j_count) * sorted[j];
    }
    total += abs_err / j_count -
             pair_sum / (static_cast<double>(j_count) * (j_count - 1));
  }
  return total / n;
}

double ssr(const std::vector<Eigen::MatrixXd>& ensembles,
           const std::vector<Eigen::VectorXd>& truths) {
  if (ensembles.empty() || ensembles.size() != truths.size())
    throw std::invalid_argument("ssr: need matching non-empty case lists");
  const Eigen::Index j_count = ensembles[0].rows();
  if (j_count < 2) throw std::invalid_argument("ssr: J >= 2 required");

  double spread_sq = 0.0;
  double err_sq = 0.0;
  for (std::size_t c = 0; c < ensembles.size(); ++c) {
    const Eigen::MatrixXd& e = ensembles[c];
    const Eigen::RowVectorXd mean = e.colwise().mean();
    spread_sq += (e.rowwise() - mean).squaredNorm() / (j_count - 1);
    err_sq += (mean.transpose() - truths[c]).squaredNorm();
  }
  spread_sq /= ensembles.size();
  err_sq /= ensembles.size();
  const double skill_sq =
      err_sq + spread_sq / (static_cast<double>(j_count) * (j_count - 1));
  if (skill_sq == 0.0)
    throw std::invalid_argument("ssr: degenerate perfect ensemble");
  return std::sqrt(spread_sq / skill_sq);
}

std::vector<long> rank_histogram(
    const std::vector<Eigen::MatrixXd>& ensembles,
    const std::vector<Eigen::VectorXd>& truths, RngStream& rng) {
  if (ensembles.empty() || ensembles.size() != truths.size())
    throw std::invalid_argument("rank_histogram: case list mismatch");
  const Eigen::Index j_count = ensembles[0].rows();
  std::vector<long> bins(j_count + 1, 0);
  for (std::size_t c = 0; c < ensembles.size(); ++c) {
    const Eigen::MatrixXd& e = ensembles[c];
    for (Eigen::Index d = 0; d < e.cols(); ++d) {
      const double t = truths[c](d);
      long below = 0, ties = 0;
      for (Eigen::Index j = 0; j < j_count; ++j) {
        if (e(j, d) < t)
          ++below;
        else if (e(j, d) == t)
          ++ties;
      }
      const long rank =
          below + (ties > 0 ? static_cast<long>(rng.next_below(ties + 1)) : 0);
      ++bins[rank];
    }
  }
  return bins;
}

double sliced_wasserstein(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                          RngStream& rng, int n_projections, double order) {
  if (p.rows() == 0 || q.rows() == 0)
    throw std::invalid_argument("sliced_wasserstein: empty sample set");
  if (p.cols() != q.cols())
    throw std::invalid_argument("sliced_wasserstein: dim mismatch");
  const Eigen::Index n = p.cols();
  const Eigen::Index count = std::min(p.rows(), q.rows());

  // subsample the larger set without replacement (partial Fisher-Yates)
  auto subsample = [&](const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
    if (m.rows() == count) return m;
    std::vector<Eigen::Index> idx(m.rows());
    std::iota(idx.begin(), idx.end(), 0);
    for (Eigen::Index i = 0; i < count; ++i) {
      const Eigen::Index j =
          i + static_cast<Eigen::Index>(rng.next_below(m.rows() - i));
      std::swap(idx[i], idx[j]);
    }
    Eigen::MatrixXd out(count, m.cols());
    for (Eigen::Index i = 0; i < count; ++i) out.row(i) = m.row(idx[i]);
    return out;
  };
  const Eigen::MatrixXd ps = subsample(p);
  const Eigen::MatrixXd qs = subsample(q);

  double acc = 0.0;
  std::vector<double> proj_p(count), proj_q(count);
  for (int l = 0; l < n_projections; ++l) {
    Eigen::VectorXd theta = rng.normal_vector(n);
    theta.normalize();
    for (Eigen::Index i = 0; i < count; ++i) {
      proj_p[i] = ps.row(i).dot(theta);
      proj_q[i] = qs.row(i).dot(theta);
    }
    std::sort(proj_p.begin(), proj_p.end());
    std::sort(proj_q.begin(), proj_q.end());
    double w = 0.0;
    for (Eigen::Index i = 0; i < count; ++i)
      w += std::pow(std::abs(proj_p[i] - proj_q[i]), order);
    acc += w / count;
  }
  return std::pow(acc / n_projections, 1.0 / order);
}

double kl_gaussian(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                   const Eigen::VectorXd& mu_star,
                   const Eigen::MatrixXd& sigma_star) {
  const Eigen::Index d = mu.size();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  Eigen::LLT<Eigen::MatrixXd> llt_star(sigma_star);
  if (llt.info() != Eigen::Success || llt_star.info() != Eigen::Success)
    throw std::invalid_argument("kl_gaussian: covariance not SPD");
  const double logdet =
      2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  const double logdet_star =
      2.0 * Eigen::MatrixXd(llt_star.matrixL()).diagonal().array().log().sum();
  const Eigen::VectorXd diff = mu_star - mu;
  return 0.5 * (logdet_star - logdet - d +
                llt_star.solve(sigma).trace() +
                diff.dot(llt_star.solve(diff)));
}

double kl_gaussian_from_samples(const Eigen::MatrixXd& samples,
                                const Eigen::VectorXd& mu_star,
                                const Eigen::MatrixXd& sigma_star) {
  const Eigen::Index count = samples.rows();
  if (count < 2)
    throw std::invalid_argument("kl_gaussian_from_samples: need >= 2 samples");
  const Eigen::VectorXd mu = samples.colwise().mean();
  const Eigen::MatrixXd centered = samples.rowwise() - mu.transpose();
  Eigen::MatrixXd sigma =
      (centered.transpose() * centered) / static_cast<double>(count - 1);
  sigma.diagonal().array() += 1e-9;
  return kl_gaussian(mu, sigma, mu_star, sigma_star);
}

}  // namespace blade

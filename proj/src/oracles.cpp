#include "blade/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace blade {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log_gaussian: covariance not SPD");
  const double half_logdet =
      Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  const Eigen::VectorXd diff = x - mean;
  return -half_logdet - 0.5 * x.size() * kLog2Pi -
         0.5 * diff.dot(llt.solve(diff));
}

}  // namespace

Eigen::VectorXd GmmPosterior::mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim());
  for (int i = 0; i < components(); ++i) m += weights[i] * means[i];
  return m;
}

Eigen::MatrixXd GmmPosterior::covariance() const {
  const Eigen::VectorXd m = mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim(), dim());
  for (int i = 0; i < components(); ++i) {
    const Eigen::VectorXd d = means[i] - m;
    cov += weights[i] * (covariances[i] + d * d.transpose());
  }
  return cov;
}

GmmPosterior gmm_posterior(const GmmPrior& prior, const Eigen::MatrixXd& h,
                           const Eigen::MatrixXd& sigma_eps,
                           const Eigen::VectorXd& y) {
  const int k_count = prior.components();
  const Eigen::Index n = prior.dim();

  Eigen::LLT<Eigen::MatrixXd> eps_llt(sigma_eps);
  if (eps_llt.info() != Eigen::Success)
    throw std::invalid_argument("gmm_posterior: Sigma_eps not SPD");
  const Eigen::MatrixXd ht_eps_inv_h = h.transpose() * eps_llt.solve(h);
  const Eigen::VectorXd ht_eps_inv_y = h.transpose() * eps_llt.solve(y);

  GmmPosterior post;
  std::vector<double> log_w(k_count);
  for (int i = 0; i < k_count; ++i) {
    const Eigen::MatrixXd& prior_cov = prior.covariances()[i];
    Eigen::LLT<Eigen::MatrixXd> prior_llt(prior_cov);
    if (prior_llt.info() != Eigen::Success)
      throw std::invalid_argument("gmm_posterior: prior covariance not SPD");
    const Eigen::MatrixXd precision =
        ht_eps_inv_h + prior_llt.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::LLT<Eigen::MatrixXd> prec_llt(precision);
    if (prec_llt.info() != Eigen::Success)
      throw std::runtime_error("gmm_posterior: singular precision");
    const Eigen::VectorXd rhs =
        ht_eps_inv_y + prior_llt.solve(prior.means()[i]);
    post.means.push_back(prec_llt.solve(rhs));
    post.covariances.push_back(
        prec_llt.solve(Eigen::MatrixXd::Identity(n, n)));

    // marginal-likelihood weight, log space
    const Eigen::MatrixXd marginal_cov =
        h * prior_cov * h.transpose() + sigma_eps;
    log_w[i] = std::log(prior.weights()[i]) +
               log_gaussian(y, h * prior.means()[i], marginal_cov);
  }

  const double m = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  for (double& lw : log_w) {
    lw = std::exp(lw - m);
    total += lw;
  }
  for (double lw : log_w) post.weights.push_back(lw / total);
  return post;
}

Eigen::MatrixXd gmm_posterior_sample(const GmmPosterior& p, Eigen::Index count,
                                     RngStream& rng) {
  std::vector<Eigen::MatrixXd> chol;
  for (const auto& cov : p.covariances) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("gmm_posterior_sample: component not SPD");
    chol.push_back(llt.matrixL());
  }
  Eigen::MatrixXd out(count, p.dim());
  for (Eigen::Index r = 0; r < count; ++r) {
    const double u = rng.next_uniform();
    double acc = 0.0;
    int pick = p.components() - 1;
    for (int i = 0; i < p.components(); ++i) {
      acc += p.weights[i];
      if (u <= acc) {
        pick = i;
        break;
      }
    }
    out.row(r) =
        (p.means[pick] + chol[pick] * rng.normal_vector(p.dim())).transpose();
  }
  return out;
}

RwmResult rwm_sample(const LogDensity& log_target, const Eigen::VectorXd& init,
                     long steps, double step_std, RngStream& rng, long thin,
                     long burn_in) {
  const Eigen::Index n = init.size();
  if (n > 4) throw std::invalid_argument("rwm_sample: n <= 4 required");
  if (burn_in < 0) burn_in = steps / 5;

  Eigen::VectorXd current = init;
  double current_lp = log_target(current);
  long accepted = 0;
  std::vector<Eigen::VectorXd> kept;
  kept.reserve((steps - burn_in) / thin + 1);

  for (long s = 0; s < steps; ++s) {
    const Eigen::VectorXd proposal =
        current + step_std * rng.normal_vector(n);
    const double lp = log_target(proposal);
    if (std::log(rng.next_uniform()) < lp - current_lp) {
      current = proposal;
      current_lp = lp;
      ++accepted;
    }
    if (s >= burn_in && (s - burn_in) % thin == 0) kept.push_back(current);
  }

  RwmResult result;
  result.samples.resize(kept.size(), n);
  for (std::size_t r = 0; r < kept.size(); ++r)
    result.samples.row(r) = kept[r].transpose();
  result.acceptance_rate =
      static_cast<double>(accepted) / static_cast<double>(steps);
  result.acceptance_warning =
      result.acceptance_rate < 0.1 || result.acceptance_rate > 0.6;
  return result;
}

Eigen::VectorXd GridPosterior::mean() const {
  return points.transpose() * probabilities;
}

Eigen::MatrixXd GridPosterior::covariance() const {
  const Eigen::VectorXd m = mean();
  const Eigen::MatrixXd centered = points.rowwise() - m.transpose();
  return centered.transpose() * probabilities.asDiagonal() * centered;
}

std::vector<double> GridPosterior::mass_near(
    const std::vector<Eigen::VectorXd>& anchors) const {
  std::vector<double> mass(anchors.size(), 0.0);
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    int best = 0;
    double best_d = (points.row(r).transpose() - anchors[0]).squaredNorm();
    for (std::size_t a = 1; a < anchors.size(); ++a) {
      const double d = (points.row(r).transpose() - anchors[a]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(a);
      }
    }
    mass[best] += probabilities(r);
  }
  return mass;
}

GridPosterior grid_posterior(const LogDensity& log_target,
                             const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper,
                             const std::vector<int>& resolution) {
  const Eigen::Index n = lower.size();
  if (n < 1 || n > 2) throw std::invalid_argument("grid_posterior: n <= 2");
  if (upper.size() != n || static_cast<Eigen::Index>(resolution.size()) != n)
    throw std::invalid_argument("grid_posterior: shape mismatch");

  long total_cells = 1;
  for (int r : resolution) {
    if (r < 2) throw std::invalid_argument("grid_posterior: resolution >= 2");
    total_cells *= r;
  }

  GridPosterior grid;
  grid.lower = lower;
  grid.upper = upper;
  grid.resolution = resolution;
  grid.points.resize(total_cells, n);
  Eigen::VectorXd log_p(total_cells);

  std::vector<double> step(n);
  for (Eigen::Index d = 0; d < n; ++d)
    step[d] = (upper(d) - lower(d)) / resolution[d];

  for (long idx = 0; idx < total_cells; ++idx) {
    long rem = idx;
    Eigen::VectorXd pt(n);
    for (Eigen::Index d = n - 1; d >= 0; --d) {
      const int cell = static_cast<int>(rem % resolution[d]);
      rem /= resolution[d];
      pt(d) = lower(d) + (cell + 0.5) * step[d];
    }
    grid.points.row(idx) = pt.transpose();
    log_p(idx) = log_target(pt);
  }

  const double m = log_p.maxCoeff();
  grid.probabilities = (log_p.array() - m).exp();
  grid.probabilities /= grid.probabilities.sum();

  // boundary-mass check; a uniform target puts exactly its area share on
  // the boundary, so compare against that share before erroring
  double boundary_mass = 0.0;
  long boundary_cells = 0;
  for (long idx = 0; idx < total_cells; ++idx) {
    long rem = idx;
    bool on_boundary = false;
    for (Eigen::Index d = n - 1; d >= 0; --d) {
      const int cell = static_cast<int>(rem % resolution[d]);
      rem /= resolution[d];
      if (cell == 0 || cell == resolution[d] - 1) on_boundary = true;
    }
    if (on_boundary) {
      boundary_mass += grid.probabilities(idx);
      ++boundary_cells;
    }
  }
  const double uniform_share =
      static_cast<double>(boundary_cells) / static_cast<double>(total_cells);
  if (boundary_mass > 1e-3 && boundary_mass > 2.0 * uniform_share)
    throw std::runtime_error(
        "grid_posterior: bounds too small, boundary mass = " +
        std::to_string(boundary_mass));
  return grid;
}

}  // namespace blade

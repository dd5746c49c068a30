#include "blade/likelihood_step.hpp"

#include <cmath>
#include <stdexcept>

namespace blade {

namespace {

// Subkey tags keeping resampling draws disjoint from substep noise.
constexpr std::uint64_t kResampleTag = 0xfffffffffffffffeull;

}  // namespace

Eigen::MatrixXd data_drift(const Ensemble& z, const Eigen::MatrixXd& gz,
                           const Eigen::VectorXd& y, double eff_sigma_y) {
  const double j_count = static_cast<double>(z.size());
  const Eigen::MatrixXd zc =
      z.particles.rowwise() - z.particles.colwise().mean();
  const Eigen::MatrixXd gc = gz.rowwise() - gz.colwise().mean();
  const Eigen::MatrixXd resid = gz.rowwise() - y.transpose();
  // inner(k, j) = <G(z^(k)) - Gbar, G(z^(j)) - y>
  const Eigen::MatrixXd inner = gc * resid.transpose();
  return -(inner.transpose() * zc) /
         (eff_sigma_y * eff_sigma_y * j_count);
}

Eigen::MatrixXd coupling_drift(const Ensemble& z, const Ensemble& anchors,
                               double rho, LikelihoodMode mode) {
  if (rho <= 0.0) throw std::invalid_argument("coupling_drift: rho <= 0");
  const Eigen::MatrixXd cov = ensemble_cov(z);
  Eigen::MatrixXd drift =
      -((z.particles - anchors.particles) * cov) / (rho * rho);
  if (mode == LikelihoodMode::kMain) {
    const double corr =
        static_cast<double>(z.dim() + 1) / static_cast<double>(z.size());
    drift += corr * (z.particles.rowwise() - z.particles.colwise().mean());
  }
  return drift;
}

Ensemble resample(const Ensemble& x, double rho, RngStream& rng,
                  bool variance_form) {
  const double mean_var = ensemble_cov(x).trace() / static_cast<double>(x.dim());
  double rho_prime;
  if (variance_form) {
    rho_prime = std::sqrt(std::max(0.0, rho * rho - mean_var));
  } else {
    rho_prime = std::max(0.0, rho - mean_var);
  }
  if (rho_prime == 0.0) return x;
  Ensemble out = x;
  out.particles += rho_prime * rng.normal_matrix(x.size(), x.dim());
  return out;
}

LikelihoodStepResult likelihood_step(
    const Ensemble& x, ForwardModel& fm, const Observation& obs, double rho,
    const LikelihoodConfig& cfg, const StepContext& ctx,
    const std::function<void(int, const Ensemble&)>& observer) {
  if (rho <= 0.0) throw std::invalid_argument("likelihood_step: rho <= 0");
  if (cfg.n_steps < 1 || cfg.gamma < 0.0 || cfg.eff_sigma_y <= 0.0)
    throw std::invalid_argument("likelihood_step: invalid config");

  const Eigen::Index j_count = x.size();
  const Eigen::Index n = x.dim();

  LikelihoodStepResult result;
  Ensemble z = x;
  if (cfg.resample) {
    RngStream rng(ctx.seed, ctx.gibbs_iteration, kResampleTag);
    z = resample(x, rho, rng, cfg.resample_variance_form);
  }

  for (int i = 0; i < cfg.n_steps; ++i) {
    const Eigen::MatrixXd gz = fm.evaluate(z.particles);
    const Eigen::MatrixXd d1 = data_drift(z, gz, obs.y, cfg.eff_sigma_y);
    const Eigen::MatrixXd d2 = coupling_drift(z, x, rho, cfg.mode);
    const Eigen::MatrixXd drift = d1 + d2;
    if (!drift.allFinite())
      throw std::runtime_error("likelihood_step: non-finite drift at substep " +
                               std::to_string(i));

    if (ensemble_cov(z).trace() < 1e-24) result.collapse_warning = true;

    const double drift_sq = drift.squaredNorm();
    if (drift_sq == 0.0 || cfg.gamma == 0.0) {
      if (observer) observer(i, z);
      continue;  // converged substep: no move, no noise
    }
    const double eta = cfg.gamma / drift_sq;

    Eigen::MatrixXd noise(j_count, n);
    const double amp = std::sqrt(2.0 * eta);
    if (cfg.mode == LikelihoodMode::kMain) {
      const EnsembleSqrt sq = ensemble_sqrt(z);
      for (Eigen::Index j = 0; j < j_count; ++j) {
        RngStream rng(ctx.seed, ctx.gibbs_iteration,
                      static_cast<std::uint64_t>(i),
                      static_cast<std::uint64_t>(j));
        noise.row(j) =
            amp * (sq.columns * rng.normal_vector(j_count)).transpose();
      }
    } else {
      const Eigen::VectorXd stddev = ensemble_std(z);
      for (Eigen::Index j = 0; j < j_count; ++j) {
        RngStream rng(ctx.seed, ctx.gibbs_iteration,
                      static_cast<std::uint64_t>(i),
                      static_cast<std::uint64_t>(j));
        noise.row(j) =
            amp * stddev.cwiseProduct(rng.normal_vector(n)).transpose();
      }
    }

    z.particles += eta * drift + noise;
    if (observer) observer(i, z);
  }

  result.ensemble = std::move(z);
  return result;
}

}  // namespace blade

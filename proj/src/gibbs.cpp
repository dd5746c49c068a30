#include "blade/gibbs.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace blade {

namespace {

constexpr std::uint64_t kInitTag = 0xb1adeb1ade000001ull;
constexpr std::uint64_t kPriorTag = 0xb1adeb1ade000002ull;
constexpr std::uint64_t kEksTag = 0xb1adeb1ade000003ull;

}  // namespace

RhoSchedule parse_schedule(const std::string& name) {
  if (name == "linear") return RhoSchedule::kLinear;
  if (name == "edm") return RhoSchedule::kEdm;
  if (name == "concave") return RhoSchedule::kConcave;
  throw std::invalid_argument("unknown schedule: " + name);
}

InitStrategy parse_init(const std::string& name) {
  if (name == "gaussian") return InitStrategy::kGaussian;
  if (name == "dm") return InitStrategy::kDm;
  throw std::invalid_argument("unknown init: " + name);
}

std::vector<double> rho_schedule(RhoSchedule schedule, int k_count,
                                 double rho_max, double rho_min) {
  if (k_count < 1) throw std::invalid_argument("rho_schedule: K < 1");
  if (k_count == 1) return {rho_max};
  if (!(rho_max > rho_min) || rho_min < 0.0)
    throw std::invalid_argument("rho_schedule: need rho_max > rho_min >= 0");
  std::vector<double> rho(k_count);
  const double denom = static_cast<double>(k_count - 1);
  for (int k = 0; k < k_count; ++k) {
    const double frac = static_cast<double>(k) / denom;
    switch (schedule) {
      case RhoSchedule::kLinear:
        rho[k] = rho_max + frac * (rho_min - rho_max);
        break;
      case RhoSchedule::kEdm: {
        const double a = std::pow(rho_max, 0.25);
        const double b = std::pow(rho_min, 0.25);
        rho[k] = std::pow(a + frac * (b - a), 4.0);
        break;
      }
      case RhoSchedule::kConcave:
        rho[k] = rho_min + (rho_max - rho_min) * (1.0 - frac * frac);
        break;
    }
  }
  return rho;
}

Ensemble initialize(const GibbsConfig& cfg, const PriorScore& score,
                    Eigen::Index dim) {
  RngStream rng(cfg.seed, kInitTag);
  if (cfg.init == InitStrategy::kGaussian) {
    return Ensemble{cfg.rho_max * rng.normal_matrix(cfg.ensemble_size, dim)};
  }
  PriorStepConfig pcfg = cfg.prior;
  pcfg.t_max = cfg.rho_max;
  return sample_prior(score, cfg.ensemble_size, pcfg, rng);
}

RunRecord run_blade(ForwardModel& fm, const Observation& obs,
                    const PriorScore& score, const GibbsConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = fm.in_dim();
  if (score.dim() != n)
    throw std::invalid_argument("run_blade: prior/model dimension mismatch");

  RunRecord record;
  record.rho_values =
      rho_schedule(cfg.schedule, cfg.iterations, cfg.rho_max, cfg.rho_min);

  fm.reset_eval_count();
  Ensemble x = initialize(cfg, score, n);
  SpanTracker span(n);

  PriorStepConfig pcfg = cfg.prior;
  pcfg.t_max = cfg.rho_max;

  for (int k = 0; k < cfg.iterations; ++k) {
    const double rho = record.rho_values[k];
    StepContext ctx{cfg.seed, static_cast<std::uint64_t>(k)};
    LikelihoodStepResult lres;
    try {
      lres = likelihood_step(x, fm, obs, rho, cfg.likelihood, ctx);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_blade: iteration " + std::to_string(k) +
                               ": " + e.what());
    }
    record.collapse_warning |= lres.collapse_warning;
    span.update(lres.ensemble);
    record.diagnostics.push_back(
        {k, rho, span.rank(), ensemble_cov(lres.ensemble).trace()});

    RngStream prior_rng(cfg.seed, static_cast<std::uint64_t>(k), kPriorTag);
    x = prior_step(lres.ensemble, score, rho, pcfg, prior_rng);
  }

  record.final_ensemble = std::move(x);
  record.forward_evals = fm.eval_count();
  record.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return record;
}

RunRecord run_eks(ForwardModel& fm, const Observation& obs,
                  const GmmPrior& prior, const EksConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (prior.components() != 1)
    throw std::invalid_argument("run_eks: Gaussian (single-component) prior "
                                "required");
  const Eigen::Index n = fm.in_dim();
  const Eigen::VectorXd prior_mean = prior.means()[0];
  const Eigen::LLT<Eigen::MatrixXd> prior_llt(prior.covariances()[0]);
  if (prior_llt.info() != Eigen::Success)
    throw std::invalid_argument("run_eks: prior covariance not SPD");

  RunRecord record;
  fm.reset_eval_count();
  RngStream init_rng(cfg.seed, kEksTag, kInitTag);
  Ensemble z{prior.sample(cfg.ensemble_size, init_rng)};
  const double corr =
      static_cast<double>(n + 1) / static_cast<double>(cfg.ensemble_size);

  for (int i = 0; i < cfg.n_steps; ++i) {
    const Eigen::MatrixXd gz = fm.evaluate(z.particles);
    const Eigen::MatrixXd d1 = data_drift(z, gz, obs.y, obs.sigma_y);
    const Eigen::MatrixXd cov = ensemble_cov(z);
    const Eigen::MatrixXd centered =
        z.particles.rowwise() - z.particles.colwise().mean();
    const Eigen::MatrixXd from_mean =
        z.particles.rowwise() - prior_mean.transpose();
    // shared potential: data misfit + Gaussian prior pull, all particles
    const Eigen::MatrixXd d_prior =
        -(prior_llt.solve(from_mean.transpose()).transpose() * cov);
    const Eigen::MatrixXd drift = d1 + d_prior + corr * centered;
    if (!drift.allFinite())
      throw std::runtime_error("run_eks: non-finite drift at step " +
                               std::to_string(i));
    const double drift_sq = drift.squaredNorm();
    if (drift_sq == 0.0 || cfg.gamma == 0.0) continue;
    const double eta = cfg.gamma / drift_sq;
    const EnsembleSqrt sq = ensemble_sqrt(z);
    const double amp = std::sqrt(2.0 * eta);
    for (Eigen::Index j = 0; j < cfg.ensemble_size; ++j) {
      RngStream rng(cfg.seed, kEksTag, static_cast<std::uint64_t>(i),
                    static_cast<std::uint64_t>(j));
      z.particles.row(j) += eta * drift.row(j) +
                            amp * (sq.columns * rng.normal_vector(
                                                    cfg.ensemble_size))
                                      .transpose();
    }
  }

  record.final_ensemble = std::move(z);
  record.forward_evals = fm.eval_count();
  record.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return record;
}

}  // namespace blade

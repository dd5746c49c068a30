#include "blade/prior_step.hpp"

#include <cmath>
#include <stdexcept>

namespace blade {

std::vector<double> karras_grid(const PriorStepConfig& cfg) {
  if (cfg.n_steps < 2)
    throw std::invalid_argument("karras_grid: need at least 2 nodes");
  if (!(cfg.t_max > cfg.t_min && cfg.t_min > 0.0))
    throw std::invalid_argument("karras_grid: need t_max > t_min > 0");
  const double e = cfg.karras_exponent;
  const double a = std::pow(cfg.t_max, 1.0 / e);
  const double b = std::pow(cfg.t_min, 1.0 / e);
  std::vector<double> grid(cfg.n_steps + 1);
  for (int i = 0; i < cfg.n_steps; ++i) {
    const double frac = static_cast<double>(i) / (cfg.n_steps - 1);
    grid[i] = std::pow(a + frac * (b - a), e);
  }
  grid[cfg.n_steps] = 0.0;
  return grid;
}

int entry_index(const std::vector<double>& grid, double rho) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] <= rho) return static_cast<int>(i);
  }
  return static_cast<int>(grid.size()) - 1;  // unreachable: last node is 0
}

Ensemble prior_step(const Ensemble& z, const PriorScore& score, double rho,
                    const PriorStepConfig& cfg, RngStream& rng) {
  const auto grid = karras_grid(cfg);
  const int n_nodes = static_cast<int>(grid.size()) - 1;  // loop to N-1
  const int start = entry_index(grid, rho);
  const double lambda = cfg.use_sde ? 2.0 : 1.0;

  Ensemble x = z;
  for (int i = start; i < n_nodes; ++i) {
    const double t = grid[i];
    const double t_next = grid[i + 1];
    const Eigen::MatrixXd drift = -lambda * t * score.score(x.particles, t);
    x.particles += (t_next - t) * drift;
    if (cfg.use_sde && i != n_nodes - 1) {
      x.particles += std::sqrt(2.0 * t * (t - t_next)) *
                     rng.normal_matrix(x.size(), x.dim());
    }
    if (!x.finite())
      throw std::runtime_error("prior_step: non-finite state at substep " +
                               std::to_string(i));
  }
  return x;
}

Ensemble sample_prior(const PriorScore& score, Eigen::Index j_count,
                      const PriorStepConfig& cfg, RngStream& rng) {
  Ensemble z{cfg.t_max * rng.normal_matrix(j_count, score.dim())};
  return prior_step(z, score, cfg.t_max, cfg, rng);
}

}  // namespace blade

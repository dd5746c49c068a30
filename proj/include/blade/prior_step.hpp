#pragma once

#include <vector>

#include <Eigen/Core>

#include "blade/ensemble.hpp"
#include "blade/prior.hpp"
#include "blade/rng.hpp"

namespace blade {

struct PriorStepConfig {
  int n_steps = 50;        // grid nodes t_0..t_{N-1}; t_N = 0 is appended
  double t_min = 0.002;
  double t_max = 4.8;
  bool use_sde = false;    // default is the Euler probability-flow ODE
  double karras_exponent = 7.0;
};

// Decreasing time grid t_0 = t_max .. t_{N-1} = t_min with the power-law
// spacing, plus a terminal node t_N = 0.
std::vector<double> karras_grid(const PriorStepConfig& cfg);

// Smallest index whose grid value is <= rho.
int entry_index(const std::vector<double>& grid, double rho);

// Denoising run from noise level rho down to 0 using the prior score.
// Particles evolve independently; one score batch-call per substep.
Ensemble prior_step(const Ensemble& z, const PriorScore& score, double rho,
                    const PriorStepConfig& cfg, RngStream& rng);

// Draw Z ~ N(0, t_max^2 I) and denoise from t_max: diffusion-model
// initialization of the outer loop.
Ensemble sample_prior(const PriorScore& score, Eigen::Index j_count,
                      const PriorStepConfig& cfg, RngStream& rng);

}  // namespace blade

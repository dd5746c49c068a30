#pragma once

#include <functional>

#include <Eigen/Core>

#include "blade/ensemble.hpp"
#include "blade/forward_model.hpp"
#include "blade/rng.hpp"

namespace blade {

enum class LikelihoodMode { kMain, kDiag };

struct LikelihoodConfig {
  LikelihoodMode mode = LikelihoodMode::kMain;
  double gamma = 20.0;       // step size scale
  double eff_sigma_y = 1.0;  // effective observation noise
  int n_steps = 50;
  bool resample = true;
  // Alternative resampling amplitude rho' = sqrt(max(0, rho^2 - Tr(C)/n)).
  bool resample_variance_form = false;
};

// Keys the counter-based noise streams so that draws for
// (gibbs iteration, substep, particle) are order-independent.
struct StepContext {
  std::uint64_t seed = 0;
  std::uint64_t gibbs_iteration = 0;
};

// Statistically linearized data-misfit drift. Gz must be the batched
// forward evaluation of z (exactly one batch per substep).
Eigen::MatrixXd data_drift(const Ensemble& z, const Eigen::MatrixXd& gz,
                           const Eigen::VectorXd& y, double eff_sigma_y);

// Coupling toward the per-particle anchor plus the finite-particle
// correction term in main mode.
Eigen::MatrixXd coupling_drift(const Ensemble& z, const Ensemble& anchors,
                               double rho, LikelihoodMode mode);

// Noise injection bringing the ensemble up to noise level rho:
// z + rho' * eps with rho' = max(0, rho - Tr(C)/n).
Ensemble resample(const Ensemble& x, double rho, RngStream& rng,
                  bool variance_form = false);

struct LikelihoodStepResult {
  Ensemble ensemble;
  bool collapse_warning = false;  // C ~ 0 encountered during the run
};

// One full likelihood sampling step: n_steps Euler-Maruyama substeps of
// the interacting-particle dynamics, anchored at x. Optional observer is
// called with (substep index, current ensemble) after every substep.
LikelihoodStepResult likelihood_step(
    const Ensemble& x, ForwardModel& fm, const Observation& obs, double rho,
    const LikelihoodConfig& cfg, const StepContext& ctx,
    const std::function<void(int, const Ensemble&)>& observer = nullptr);

}  // namespace blade

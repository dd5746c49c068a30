#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blade/ensemble.hpp"
#include "blade/forward_model.hpp"
#include "blade/likelihood_step.hpp"
#include "blade/prior.hpp"
#include "blade/prior_step.hpp"

namespace blade {

enum class RhoSchedule { kLinear, kEdm, kConcave };
enum class InitStrategy { kGaussian, kDm };

RhoSchedule parse_schedule(const std::string& name);
InitStrategy parse_init(const std::string& name);

struct GibbsConfig {
  int iterations = 25;  // K
  double rho_max = 4.8;
  double rho_min = 0.08;
  RhoSchedule schedule = RhoSchedule::kLinear;
  InitStrategy init = InitStrategy::kGaussian;
  LikelihoodConfig likelihood;
  PriorStepConfig prior;
  Eigen::Index ensemble_size = 512;
  std::uint64_t seed = 0;
};

// rho_0 = rho_max, rho_{K-1} = rho_min, strictly decreasing.
std::vector<double> rho_schedule(RhoSchedule schedule, int k_count,
                                 double rho_max, double rho_min);

Ensemble initialize(const GibbsConfig& cfg, const PriorScore& score,
                    Eigen::Index dim);

struct DiagnosticsRow {
  int iteration;
  double rho;
  int span_rank;
  double trace_cov;
};

struct RunRecord {
  Ensemble final_ensemble;
  std::vector<double> rho_values;
  std::int64_t forward_evals = 0;
  std::vector<DiagnosticsRow> diagnostics;
  double wall_clock_seconds = 0.0;
  bool collapse_warning = false;
};

// The full split-Gibbs loop: alternate likelihood and prior steps under
// the annealing schedule, tracking the accumulated span rank.
RunRecord run_blade(ForwardModel& fm, const Observation& obs,
                    const PriorScore& score, const GibbsConfig& cfg);

struct EksConfig {
  double gamma = 20.0;
  int n_steps = 1000;
  Eigen::Index ensemble_size = 512;
  std::uint64_t seed = 0;
};

// Ensemble Kalman sampler baseline: the same preconditioned interacting
// dynamics, but every particle shares the single posterior potential.
// Requires a single-component Gaussian prior.
RunRecord run_eks(ForwardModel& fm, const Observation& obs,
                  const GmmPrior& prior, const EksConfig& cfg);

}  // namespace blade

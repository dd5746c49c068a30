#include <doctest.h>

#include <cmath>

#include "blade/prior_step.hpp"

using namespace blade;

namespace {

GmmPrior std_normal(int n) {
  return GmmPrior({1.0}, {Eigen::VectorXd::Zero(n)},
                  {Eigen::MatrixXd::Identity(n, n)});
}

}  // namespace

TEST_CASE("karras_grid shape and endpoints") {
  PriorStepConfig cfg;
  cfg.n_steps = 50;
  cfg.t_min = 0.002;
  cfg.t_max = 4.8;
  const auto grid = karras_grid(cfg);
  REQUIRE(grid.size() == 51);
  CHECK(grid.front() == doctest::Approx(4.8));
  CHECK(grid[49] == doctest::Approx(0.002));
  CHECK(grid.back() == 0.0);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) CHECK(grid[i] > grid[i + 1]);
}

TEST_CASE("karras_grid with exponent 1 is uniform") {
  PriorStepConfig cfg;
  cfg.n_steps = 5;
  cfg.t_min = 1.0;
  cfg.t_max = 5.0;
  cfg.karras_exponent = 1.0;
  const auto grid = karras_grid(cfg);
  const std::vector<double> want{5.0, 4.0, 3.0, 2.0, 1.0, 0.0};
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(grid[i] == doctest::Approx(want[i]));
}

TEST_CASE("karras_grid rejects bad configs") {
  PriorStepConfig cfg;
  cfg.n_steps = 1;
  CHECK_THROWS(karras_grid(cfg));
  cfg.n_steps = 10;
  cfg.t_min = 2.0;
  cfg.t_max = 1.0;
  CHECK_THROWS(karras_grid(cfg));
}

TEST_CASE("entry_index picks the first node at or below rho") {
  const std::vector<double> grid{4.0, 2.0, 1.0, 0.0};
  CHECK(entry_index(grid, 2.5) == 1);
  CHECK(entry_index(grid, 5.0) == 0);
  CHECK(entry_index(grid, 2.0) == 1);
  CHECK(entry_index(grid, 0.5) == 3);
}

TEST_CASE("two Euler steps on a standard-normal prior, by hand") {
  // score(x, t) = -x / (1 + t^2). Grid {1, 0.5, 0}:
  //   t=1   -> 0.5: x <- x (1 - 0.5 * 1/2)   = 0.75 x
  //   t=0.5 -> 0  : x <- x (1 - 0.5 * 0.25/1.25) = 0.9 * ... -> 0.6 x0
  const GmmPrior prior = std_normal(1);
  PriorStepConfig cfg;
  cfg.n_steps = 2;
  cfg.t_min = 0.5;
  cfg.t_max = 1.0;
  cfg.karras_exponent = 1.0;
  RngStream rng(1);
  Ensemble z{Eigen::MatrixXd::Constant(1, 1, 1.0)};
  const Ensemble out = prior_step(z, prior, 1.0, cfg, rng);
  CHECK(out.particles(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("entry below the whole grid is a no-op") {
  const GmmPrior prior = std_normal(2);
  PriorStepConfig cfg;
  cfg.n_steps = 5;
  cfg.t_min = 0.1;
  cfg.t_max = 2.0;
  RngStream rng(1);
  // rho below every positive node: start index is the terminal node.
  Ensemble z{Eigen::MatrixXd::Constant(3, 2, 1.5)};
  const Ensemble out = prior_step(z, prior, 0.05, cfg, rng);
  CHECK((out.particles - z.particles).norm() == 0.0);
}

TEST_CASE("ODE consumes no randomness") {
  const GmmPrior prior = std_normal(2);
  PriorStepConfig cfg;
  cfg.n_steps = 20;
  RngStream a(1), b(999);
  Ensemble z{RngStream(7).normal_matrix(10, 2)};
  const Ensemble oa = prior_step(z, prior, 3.0, cfg, a);
  const Ensemble ob = prior_step(z, prior, 3.0, cfg, b);
  CHECK((oa.particles - ob.particles).norm() == 0.0);
}

TEST_CASE("denoising a noised standard normal recovers it") {
  const int n = 2, j_count = 10000;
  const GmmPrior prior = std_normal(n);
  PriorStepConfig cfg;
  cfg.n_steps = 200;
  cfg.t_min = 0.002;
  cfg.t_max = 3.0;

  for (bool sde : {false, true}) {
    CAPTURE(sde);
    cfg.use_sde = sde;
    RngStream rng(41 + (sde ? 1 : 0));
    const double t0 = cfg.t_max;
    // X_t ~ N(0, (1 + t^2) I) at the entry level.
    Ensemble z{std::sqrt(1.0 + t0 * t0) * rng.normal_matrix(j_count, n)};
    const Ensemble out = prior_step(z, prior, t0, cfg, rng);
    const Eigen::VectorXd mean = ensemble_mean(out);
    const Eigen::MatrixXd cov = ensemble_cov(out);
    CHECK(mean.norm() < 0.05);
    for (int i = 0; i < n; ++i)
      CHECK(cov(i, i) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::abs(cov(0, 1)) < 0.05);
  }
}

TEST_CASE("sample_prior hits the moments of a standard normal") {
  const GmmPrior prior = std_normal(2);
  PriorStepConfig cfg;
  cfg.n_steps = 200;
  RngStream rng(5);
  const Ensemble out = sample_prior(prior, 10000, cfg, rng);
  CHECK(ensemble_mean(out).norm() < 0.05);
  const Eigen::MatrixXd cov = ensemble_cov(out);
  CHECK(cov(0, 0) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(cov(1, 1) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("sample_prior splits mass across well-separated modes") {
  const GmmPrior prior({0.5, 0.5},
                       {Eigen::VectorXd::Constant(1, -4.0),
                        Eigen::VectorXd::Constant(1, 4.0)},
                       {Eigen::MatrixXd::Identity(1, 1),
                        Eigen::MatrixXd::Identity(1, 1)});

  PriorStepConfig cfg;
  cfg.n_steps = 150;
  cfg.t_max = 8.0;
  RngStream rng(9);
  const Ensemble out = sample_prior(prior, 8000, cfg, rng);
  const double frac_right =
      (out.particles.array() > 0.0).cast<double>().mean();
  CHECK(frac_right == doctest::Approx(0.5).epsilon(0.06));
  // mass between the modes should match the prior's own ~2.3% there
  const double stray =
      (out.particles.array().abs() < 2.0).cast<double>().mean();
  CHECK(stray < 0.05);
}

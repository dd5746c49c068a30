#include <doctest.h>

#include <cmath>

#include "blade/gibbs.hpp"
#include "blade/metrics.hpp"
#include "blade/oracles.hpp"

using namespace blade;

namespace {

GmmPrior std_normal(int n) {
  return GmmPrior({1.0}, {Eigen::VectorXd::Zero(n)},
                  {Eigen::MatrixXd::Identity(n, n)});
}

}  // namespace

TEST_CASE("schedule parsing") {
  CHECK(parse_schedule("linear") == RhoSchedule::kLinear);
  CHECK(parse_schedule("edm") == RhoSchedule::kEdm);
  CHECK(parse_schedule("concave") == RhoSchedule::kConcave);
  CHECK_THROWS(parse_schedule("cosine"));
  CHECK(parse_init("gaussian") == InitStrategy::kGaussian);
  CHECK(parse_init("dm") == InitStrategy::kDm);
  CHECK_THROWS(parse_init("warm"));
}

TEST_CASE("rho_schedule values") {
  SUBCASE("linear, K = 3") {
    const auto r = rho_schedule(RhoSchedule::kLinear, 3, 4.0, 0.1);
    REQUIRE(r.size() == 3);
    CHECK(r[0] == doctest::Approx(4.0));
    CHECK(r[1] == doctest::Approx(2.05));
    CHECK(r[2] == doctest::Approx(0.1));
  }
  SUBCASE("concave, K = 3") {
    // rho_min + (rho_max - rho_min)(1 - k^2/(K-1)^2) at k = 1: 3/4 of range
    const auto r = rho_schedule(RhoSchedule::kConcave, 3, 4.0, 0.0);
    CHECK(r[0] == doctest::Approx(4.0));
    CHECK(r[1] == doctest::Approx(3.0));
    CHECK(r[2] == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("edm endpoints and monotonicity") {
    const auto r = rho_schedule(RhoSchedule::kEdm, 10, 4.8, 0.08);
    CHECK(r.front() == doctest::Approx(4.8));
    CHECK(r.back() == doctest::Approx(0.08));
    for (std::size_t i = 0; i + 1 < r.size(); ++i) CHECK(r[i] > r[i + 1]);
  }
  SUBCASE("K = 1 collapses to rho_max") {
    const auto r = rho_schedule(RhoSchedule::kLinear, 1, 4.8, 0.08);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(4.8));
  }
}

TEST_CASE("gaussian initialization has std rho_max") {
  GibbsConfig cfg;
  cfg.ensemble_size = 20000;
  cfg.rho_max = 3.0;
  cfg.seed = 77;
  const GmmPrior prior = std_normal(2);
  const Ensemble e = initialize(cfg, prior, 2);
  REQUIRE(e.size() == 20000);
  CHECK(ensemble_mean(e).norm() < 0.05);
  const Eigen::MatrixXd cov = ensemble_cov(e);
  CHECK(cov(0, 0) == doctest::Approx(9.0).epsilon(0.05));
  CHECK(cov(1, 1) == doctest::Approx(9.0).epsilon(0.05));
}

TEST_CASE("dm initialization lands on the prior") {
  GibbsConfig cfg;
  cfg.ensemble_size = 5000;
  cfg.init = InitStrategy::kDm;
  cfg.prior.n_steps = 100;
  cfg.seed = 78;
  const GmmPrior prior = std_normal(1);
  const Ensemble e = initialize(cfg, prior, 1);
  CHECK(ensemble_mean(e).norm() < 0.06);
  CHECK(ensemble_cov(e)(0, 0) == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("run_blade determinism and budget accounting") {
  auto inst = make_test_instance("linear-gaussian", 2, 1.0, 5);
  GibbsConfig cfg;
  cfg.iterations = 4;
  cfg.ensemble_size = 32;
  cfg.likelihood.n_steps = 6;
  cfg.prior.n_steps = 10;
  cfg.seed = 123;

  const auto a = run_blade(*inst.model, inst.obs, *inst.prior, cfg);
  const auto b = run_blade(*inst.model, inst.obs, *inst.prior, cfg);
  CHECK((a.final_ensemble.particles - b.final_ensemble.particles).norm() ==
        0.0);
  CHECK(a.forward_evals == 32 * 6 * 4);  // J * N * K, nothing else
  REQUIRE(a.rho_values.size() == 4);
  CHECK(a.rho_values.front() == doctest::Approx(cfg.rho_max));
  CHECK(a.rho_values.back() == doctest::Approx(cfg.rho_min));
  REQUIRE(a.diagnostics.size() == 4);
  CHECK(a.diagnostics.back().span_rank >= 2);
  CHECK(a.final_ensemble.finite());
  CHECK(a.wall_clock_seconds > 0.0);

  SUBCASE("changing the seed changes the draw") {
    GibbsConfig cfg2 = cfg;
    cfg2.seed = 124;
    const auto c = run_blade(*inst.model, inst.obs, *inst.prior, cfg2);
    CHECK((a.final_ensemble.particles - c.final_ensemble.particles).norm() >
          0.0);
  }
}

TEST_CASE("run_blade approximates a 1-d conjugate posterior") {
  // prior N(0,1), G = id, y = 1, sigma_y = 1 -> posterior N(0.5, 0.5)
  const GmmPrior prior = std_normal(1);
  LinearModel fm(Eigen::MatrixXd::Identity(1, 1));
  Observation obs{Eigen::VectorXd::Constant(1, 1.0), 1.0};

  GibbsConfig cfg;
  cfg.iterations = 25;
  cfg.ensemble_size = 512;
  cfg.likelihood.n_steps = 50;
  cfg.likelihood.gamma = 2.0;
  cfg.likelihood.eff_sigma_y = 1.0;
  cfg.prior.n_steps = 50;
  cfg.seed = 9;

  const auto rec = run_blade(fm, obs, prior, cfg);
  const double mean = ensemble_mean(rec.final_ensemble)(0);
  const double var = ensemble_cov(rec.final_ensemble)(0, 0);
  CHECK(mean == doctest::Approx(0.5).epsilon(0.25));
  CHECK(var == doctest::Approx(0.5).epsilon(0.5));
}

TEST_CASE("eks rejects mixture priors") {
  auto inst = make_test_instance("linear-gmm4", 2, -1.0, 3);
  EksConfig cfg;
  cfg.n_steps = 5;
  cfg.ensemble_size = 8;
  CHECK_THROWS(run_eks(*inst.model, inst.obs, *inst.prior, cfg));
}

TEST_CASE("eks converges to the linear-Gaussian posterior") {
  // prior N(0, I), H = [1 0], sigma_y = 1, y = 2:
  // posterior mean (1, 0), covariance diag(1/2, 1)
  const GmmPrior prior = std_normal(2);
  Eigen::MatrixXd h(1, 2);
  h << 1.0, 0.0;
  LinearModel fm(h);
  Observation obs{Eigen::VectorXd::Constant(1, 2.0), 1.0};

  EksConfig cfg;
  cfg.n_steps = 2000;
  cfg.ensemble_size = 512;
  cfg.gamma = 2.0;
  cfg.seed = 11;

  const auto rec = run_eks(fm, obs, prior, cfg);
  const Eigen::VectorXd mean = ensemble_mean(rec.final_ensemble);
  const Eigen::MatrixXd cov = ensemble_cov(rec.final_ensemble);
  CHECK(mean(0) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(std::abs(mean(1)) < 0.15);
  CHECK(cov(0, 0) == doctest::Approx(0.5).epsilon(0.25));
  CHECK(cov(1, 1) == doctest::Approx(1.0).epsilon(0.25));
}

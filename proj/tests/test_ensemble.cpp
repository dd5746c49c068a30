#include <doctest.h>

#include <Eigen/Dense>

#include "blade/ensemble.hpp"

using namespace blade;

namespace {

Ensemble two_particles() {
  Eigen::MatrixXd p(2, 2);
  p << 1, 0, -1, 0;
  return Ensemble{p};
}

}  // namespace

TEST_CASE("ensemble_mean basics") {
  CHECK(ensemble_mean(two_particles()).isZero(1e-15));

  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(5, 2, 2.0);
  const Eigen::VectorXd m = ensemble_mean(Ensemble{c});
  CHECK(m(0) == doctest::Approx(2.0));
  CHECK(m(1) == doctest::Approx(2.0));

  Eigen::MatrixXd p(2, 1);
  p << 0, 2;
  CHECK(ensemble_mean(Ensemble{p})(0) == doctest::Approx(1.0));
}

TEST_CASE("ensemble_cov uses biased normalization") {
  const Eigen::MatrixXd cov = ensemble_cov(two_particles());
  CHECK(cov(0, 0) == doctest::Approx(1.0));
  CHECK(cov(0, 1) == doctest::Approx(0.0));
  CHECK(cov(1, 1) == doctest::Approx(0.0));

  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(4, 3, 7.0);
  CHECK(ensemble_cov(Ensemble{c}).isZero(1e-15));

  Eigen::MatrixXd p(2, 1);
  p << 0, 2;
  CHECK(ensemble_cov(Ensemble{p})(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("ensemble_sqrt reconstructs the covariance") {
  const EnsembleSqrt s = ensemble_sqrt(two_particles());
  const Eigen::MatrixXd prod = s.columns * s.columns.transpose();
  CHECK(prod(0, 0) == doctest::Approx(1.0));
  CHECK(prod(1, 1) == doctest::Approx(0.0));

  // random ensembles: ||sqrtC sqrtC^T - C||_F small
  RngStream rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    Ensemble e{rng.normal_matrix(5 + trial, 3)};
    const Eigen::MatrixXd cov = ensemble_cov(e);
    const EnsembleSqrt sq = ensemble_sqrt(e);
    const double err = (sq.columns * sq.columns.transpose() - cov).norm();
    CHECK(err <= 1e-10 * (1.0 + cov.norm()));
  }
}

TEST_CASE("ensemble_cov stays PSD") {
  RngStream rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Ensemble e{rng.normal_matrix(4, 6)};  // rank-deficient on purpose
    const Eigen::MatrixXd cov = ensemble_cov(e);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("apply_sqrt_noise matches the target covariance") {
  SUBCASE("collapsed ensemble gives zero noise") {
    EnsembleSqrt s{Eigen::MatrixXd::Zero(2, 3)};
    RngStream rng(1);
    CHECK(apply_sqrt_noise(s, 2.0, rng).isZero(0.0));
  }

  SUBCASE("1-d std check") {
    // single nonzero column value c, scale 2: noise std = sqrt(2)|c|
    const double c = 1.5;
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(1, 2);
    cols(0, 0) = c;
    EnsembleSqrt s{cols};
    RngStream rng(2);
    const int draws = 100000;
    double sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double v = apply_sqrt_noise(s, 2.0, rng)(0, 0);
      sq += v * v;
    }
    const double std_hat = std::sqrt(sq / draws);
    CHECK(std_hat == doctest::Approx(std::sqrt(2.0) * c).epsilon(0.02));
  }

  SUBCASE("empirical covariance approaches scale * C") {
    RngStream rng(3);
    Ensemble e{rng.normal_matrix(6, 2)};
    const Eigen::MatrixXd cov = ensemble_cov(e);
    const EnsembleSqrt s = ensemble_sqrt(e);
    const double scale = 1.7;
    const int draws = 100000;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(2, 2);
    for (int i = 0; i < draws; ++i) {
      const Eigen::VectorXd v = apply_sqrt_noise(s, scale, rng).row(0);
      acc += v * v.transpose();
    }
    acc /= draws;
    CHECK((acc - scale * cov).norm() <= 0.05 * (scale * cov).norm());
  }
}

TEST_CASE("span tracker rank accumulation") {
  SpanTracker tracker(2);
  Eigen::MatrixXd p1(2, 2);
  p1 << 1, 0, -1, 0;
  tracker.update(Ensemble{p1});
  CHECK(tracker.rank() == 1);

  Eigen::MatrixXd p2(2, 2);
  p2 << 0, 1, 0, -1;
  tracker.update(Ensemble{p2});
  CHECK(tracker.rank() == 2);

  tracker.update(Ensemble{p2});
  CHECK(tracker.rank() == 2);  // no new directions

  // monotone + bounded on random streams
  SpanTracker t2(5);
  RngStream rng(5);
  int prev = 0;
  for (int i = 0; i < 4; ++i) {
    t2.update(Ensemble{rng.normal_matrix(3, 5)});
    CHECK(t2.rank() >= prev);
    CHECK(t2.rank() <= std::min<long>(5, 3 * (i + 1)));
    prev = t2.rank();
  }
}

TEST_CASE("csv round trip") {
  RngStream rng(9);
  Ensemble e{rng.normal_matrix(7, 3)};
  const std::string path = "ensemble_roundtrip_test.csv";
  save_ensemble_csv(e, path);
  const Ensemble back = load_ensemble_csv(path);
  CHECK((back.particles - e.particles).norm() == doctest::Approx(0.0));
  std::remove(path.c_str());
}

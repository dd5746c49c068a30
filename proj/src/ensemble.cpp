#include "blade/ensemble.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace blade {

Eigen::VectorXd ensemble_mean(const Ensemble& e) {
  return e.particles.colwise().mean();
}

Eigen::MatrixXd ensemble_cov(const Ensemble& e) {
  const Eigen::MatrixXd centered =
      e.particles.rowwise() - e.particles.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(e.size());
}

Eigen::VectorXd ensemble_std(const Ensemble& e) {
  const Eigen::MatrixXd centered =
      e.particles.rowwise() - e.particles.colwise().mean();
  return (centered.array().square().colwise().sum() /
          static_cast<double>(e.size()))
      .sqrt()
      .transpose();
}

EnsembleSqrt ensemble_sqrt(const Ensemble& e) {
  const Eigen::MatrixXd centered =
      e.particles.rowwise() - e.particles.colwise().mean();
  return {centered.transpose() / std::sqrt(static_cast<double>(e.size()))};
}

Eigen::MatrixXd apply_sqrt_noise(const EnsembleSqrt& s, double scale,
                                 RngStream& rng) {
  const Eigen::Index n = s.columns.rows();
  const Eigen::Index j_count = s.columns.cols();
  Eigen::MatrixXd noise(j_count, n);
  const double c = std::sqrt(scale);
  for (Eigen::Index j = 0; j < j_count; ++j) {
    noise.row(j) = c * (s.columns * rng.normal_vector(j_count)).transpose();
  }
  return noise;
}

void SpanTracker::update(const Ensemble& e, double tol) {
  const Eigen::MatrixXd centered =
      (e.particles.rowwise() - e.particles.colwise().mean()).transpose();
  Eigen::MatrixXd stacked(dim_, rank_ + centered.cols());
  if (rank_ > 0) stacked.leftCols(rank_) = basis_;
  stacked.rightCols(centered.cols()) = centered;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? tol * sv(0) : 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++r;
  if (r > rank_) {
    basis_ = svd.matrixU().leftCols(r);
    rank_ = r;
  }
  // rank is monotone: a shrinking singular spectrum never discards basis
}

void save_ensemble_csv(const Ensemble& e, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (Eigen::Index d = 0; d < e.dim(); ++d)
    out << (d ? "," : "") << "dim_" << d;
  out << "\n";
  out.precision(17);
  for (Eigen::Index j = 0; j < e.size(); ++j) {
    for (Eigen::Index d = 0; d < e.dim(); ++d)
      out << (d ? "," : "") << e.particles(j, d);
    out << "\n";
  }
}

Ensemble load_ensemble_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("no particles in " + path);
  Eigen::MatrixXd p(rows.size(), rows[0].size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j].size() != rows[0].size())
      throw std::runtime_error("ragged csv: " + path);
    for (std::size_t d = 0; d < rows[j].size(); ++d) p(j, d) = rows[j][d];
  }
  return Ensemble{std::move(p)};
}

}  // namespace blade

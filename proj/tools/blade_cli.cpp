// Benchmark harness: runs the samplers and oracles on the built-in
// instances, computes metrics, and writes reproducible CSV/JSON reports.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <json.hpp>

#include "blade/gibbs.hpp"
#include "blade/metrics.hpp"
#include "blade/oracles.hpp"

using json = nlohmann::ordered_json;
using namespace blade;

namespace {

constexpr int kSummaryVersion = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// config schema

void reject_unknown_keys(const json& node, const std::string& path,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, value] : node.items()) {
    if (!allowed.count(key))
      throw ConfigError("unknown config key: " +
                        (path.empty() ? key : path + "." + key));
  }
}

struct RunConfig {
  std::string instance_name;
  Eigen::Index n = 2;
  double sigma_y = -1.0;  // instance default when <= 0
  std::uint64_t instance_seed = 0;
  std::string method;  // blade | eks | oracle-analytic | oracle-rwm | oracle-grid
  GibbsConfig blade;
  EksConfig eks;
  // oracle settings
  Eigen::Index oracle_count = 10000;
  long rwm_steps = 200000;
  double rwm_step_std = 1.0;
  std::vector<int> grid_resolution{256, 256};
  double grid_padding = 30.0;  // half-width of the quadrature box
  std::string output = "out";
  json echo;  // verbatim parsed config for the summary
};

LikelihoodConfig parse_likelihood(const json& node, const std::string& path) {
  reject_unknown_keys(node, path,
                      {"mode", "gamma", "eff_sigma_y", "n_steps", "resample",
                       "resample_variance_form"});
  LikelihoodConfig cfg;
  if (node.contains("mode")) {
    const std::string mode = node["mode"];
    if (mode == "main")
      cfg.mode = LikelihoodMode::kMain;
    else if (mode == "diag")
      cfg.mode = LikelihoodMode::kDiag;
    else
      throw ConfigError("invalid value for " + path + ".mode: " + mode);
  }
  cfg.gamma = node.value("gamma", cfg.gamma);
  cfg.eff_sigma_y = node.value("eff_sigma_y", cfg.eff_sigma_y);
  cfg.n_steps = node.value("n_steps", cfg.n_steps);
  cfg.resample = node.value("resample", cfg.resample);
  cfg.resample_variance_form =
      node.value("resample_variance_form", cfg.resample_variance_form);
  return cfg;
}

PriorStepConfig parse_prior_step(const json& node, const std::string& path) {
  reject_unknown_keys(node, path,
                      {"n_steps", "t_min", "use_sde", "karras_exponent"});
  PriorStepConfig cfg;
  cfg.n_steps = node.value("n_steps", cfg.n_steps);
  cfg.t_min = node.value("t_min", cfg.t_min);
  cfg.use_sde = node.value("use_sde", cfg.use_sde);
  cfg.karras_exponent = node.value("karras_exponent", cfg.karras_exponent);
  return cfg;
}

RunConfig parse_config(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot read config file: " + config_path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  reject_unknown_keys(root, "",
                      {"instance", "method", "blade", "eks", "oracle",
                       "output"});
  RunConfig cfg;
  cfg.echo = root;

  if (!root.contains("instance"))
    throw ConfigError("missing config key: instance");
  const json& inst = root["instance"];
  reject_unknown_keys(inst, "instance", {"name", "n", "sigma_y", "seed"});
  if (!inst.contains("name"))
    throw ConfigError("missing config key: instance.name");
  cfg.instance_name = inst["name"];
  cfg.n = inst.value("n", 2);
  cfg.sigma_y = inst.value("sigma_y", -1.0);
  cfg.instance_seed = inst.value("seed", 0);

  if (!root.contains("method")) throw ConfigError("missing config key: method");
  cfg.method = root["method"];
  const std::set<std::string> methods{"blade", "eks", "oracle-analytic",
                                      "oracle-rwm", "oracle-grid"};
  if (!methods.count(cfg.method))
    throw ConfigError("invalid value for method: " + cfg.method);

  if (root.contains("blade")) {
    const json& b = root["blade"];
    reject_unknown_keys(b, "blade",
                        {"iterations", "rho_max", "rho_min", "schedule",
                         "init", "ensemble_size", "seed", "likelihood",
                         "prior"});
    cfg.blade.iterations = b.value("iterations", cfg.blade.iterations);
    cfg.blade.rho_max = b.value("rho_max", cfg.blade.rho_max);
    cfg.blade.rho_min = b.value("rho_min", cfg.blade.rho_min);
    if (b.contains("schedule")) {
      try {
        cfg.blade.schedule = parse_schedule(b["schedule"]);
      } catch (const std::invalid_argument&) {
        throw ConfigError("invalid value for blade.schedule: " +
                          b["schedule"].get<std::string>());
      }
    }
    if (b.contains("init")) {
      try {
        cfg.blade.init = parse_init(b["init"]);
      } catch (const std::invalid_argument&) {
        throw ConfigError("invalid value for blade.init: " +
                          b["init"].get<std::string>());
      }
    }
    cfg.blade.ensemble_size = b.value("ensemble_size", cfg.blade.ensemble_size);
    cfg.blade.seed = b.value("seed", cfg.blade.seed);
    if (b.contains("likelihood"))
      cfg.blade.likelihood =
          parse_likelihood(b["likelihood"], "blade.likelihood");
    if (b.contains("prior"))
      cfg.blade.prior = parse_prior_step(b["prior"], "blade.prior");
  }
  if (root.contains("eks")) {
    const json& e = root["eks"];
    reject_unknown_keys(e, "eks",
                        {"gamma", "n_steps", "ensemble_size", "seed"});
    cfg.eks.gamma = e.value("gamma", cfg.eks.gamma);
    cfg.eks.n_steps = e.value("n_steps", cfg.eks.n_steps);
    cfg.eks.ensemble_size = e.value("ensemble_size", cfg.eks.ensemble_size);
    cfg.eks.seed = e.value("seed", cfg.eks.seed);
  }
  if (root.contains("oracle")) {
    const json& o = root["oracle"];
    reject_unknown_keys(o, "oracle",
                        {"count", "rwm_steps", "rwm_step_std",
                         "grid_resolution", "grid_padding"});
    cfg.oracle_count = o.value("count", cfg.oracle_count);
    cfg.rwm_steps = o.value("rwm_steps", cfg.rwm_steps);
    cfg.rwm_step_std = o.value("rwm_step_std", cfg.rwm_step_std);
    if (o.contains("grid_resolution"))
      cfg.grid_resolution = o["grid_resolution"].get<std::vector<int>>();
    cfg.grid_padding = o.value("grid_padding", cfg.grid_padding);
  }
  cfg.output = root.value("output", cfg.output);
  return cfg;
}

// ---------------------------------------------------------------------------
// method execution

std::optional<GmmPosterior> analytic_posterior(const TestInstance& inst) {
  const auto* lin = dynamic_cast<const LinearModel*>(inst.model.get());
  if (lin == nullptr) return std::nullopt;
  const Eigen::Index m = lin->matrix().rows();
  const double s = inst.obs.sigma_y;
  return gmm_posterior(*inst.prior, lin->matrix(),
                       s * s * Eigen::MatrixXd::Identity(m, m), inst.obs.y);
}

LogDensity log_posterior(const TestInstance& inst) {
  return [&inst](const Eigen::VectorXd& x) {
    const Eigen::MatrixXd row = x.transpose();
    const double misfit =
        likelihood_potential(*inst.model, inst.obs, row)(0);
    return inst.prior->log_density(row, 0.0)(0) - misfit;
  };
}

struct RunOutput {
  Eigen::MatrixXd samples;
  std::int64_t forward_evals = 0;
  double wall_clock_seconds = 0.0;
  bool collapse_warning = false;
  std::vector<DiagnosticsRow> diagnostics;
};

RunOutput execute(const RunConfig& cfg, const TestInstance& inst) {
  RunOutput out;
  if (cfg.method == "blade") {
    const auto rec = run_blade(*inst.model, inst.obs, *inst.prior, cfg.blade);
    out.samples = rec.final_ensemble.particles;
    out.forward_evals = rec.forward_evals;
    out.wall_clock_seconds = rec.wall_clock_seconds;
    out.collapse_warning = rec.collapse_warning;
    out.diagnostics = rec.diagnostics;
  } else if (cfg.method == "eks") {
    const auto rec = run_eks(*inst.model, inst.obs, *inst.prior, cfg.eks);
    out.samples = rec.final_ensemble.particles;
    out.forward_evals = rec.forward_evals;
    out.wall_clock_seconds = rec.wall_clock_seconds;
  } else if (cfg.method == "oracle-analytic") {
    const auto start = std::chrono::steady_clock::now();
    const auto post = analytic_posterior(inst);
    if (!post)
      throw ConfigError(
          "oracle-analytic requires a linear forward model (instance " +
          cfg.instance_name + ")");
    RngStream rng(cfg.instance_seed, 0x0eac1eull);
    out.samples = gmm_posterior_sample(*post, cfg.oracle_count, rng);
    out.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
  } else if (cfg.method == "oracle-rwm") {
    const auto start = std::chrono::steady_clock::now();
    RngStream rng(cfg.instance_seed, 0x0eac1eull, 1);
    const auto res =
        rwm_sample(log_posterior(inst), inst.prior->means()[0], cfg.rwm_steps,
                   cfg.rwm_step_std, rng);
    if (res.acceptance_warning)
      std::fprintf(stderr,
                   "warning: rwm acceptance rate %.3f outside [0.1, 0.6]\n",
                   res.acceptance_rate);
    out.samples = res.samples;
    out.forward_evals = inst.model->eval_count();
    out.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
  } else if (cfg.method == "oracle-grid") {
    const auto start = std::chrono::steady_clock::now();
    const Eigen::Index n = inst.model->in_dim();
    Eigen::VectorXd center = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < inst.prior->components(); ++i)
      center += inst.prior->weights()[i] * inst.prior->means()[i];
    const Eigen::VectorXd lower =
        center.array() - cfg.grid_padding;
    const Eigen::VectorXd upper = center.array() + cfg.grid_padding;
    std::vector<int> res = cfg.grid_resolution;
    res.resize(n, res.empty() ? 256 : res.back());
    const auto grid = grid_posterior(log_posterior(inst), lower, upper, res);
    // draw a sample set from the cell weights for metric computation
    RngStream rng(cfg.instance_seed, 0x0eac1eull, 2);
    out.samples.resize(cfg.oracle_count, n);
    std::vector<double> cdf(grid.probabilities.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < grid.probabilities.size(); ++i)
      cdf[i] = (acc += grid.probabilities(i));
    for (Eigen::Index s = 0; s < cfg.oracle_count; ++s) {
      const double u = rng.next_uniform();
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      out.samples.row(s) =
          grid.points.row(std::distance(cdf.begin(), it));
    }
    out.forward_evals = inst.model->eval_count();
    out.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
  }
  return out;
}

MetricsReport compute_metrics(const RunConfig& cfg, const TestInstance& inst,
                              const Eigen::MatrixXd& samples) {
  MetricsReport rep;
  const Eigen::VectorXd mean =
      samples.colwise().mean().transpose();
  rep.rel_l2 = rel_l2(mean, inst.ground_truth);
  if (samples.rows() >= 2) {
    rep.crps = crps(samples, inst.ground_truth);
    rep.ssr = ssr({samples}, {inst.ground_truth});
  }
  RngStream rng(cfg.instance_seed, 0x3e7811c5ull);
  rep.rank_histogram = rank_histogram({samples}, {inst.ground_truth}, rng);
  if (const auto post = analytic_posterior(inst)) {
    rep.kl_gaussian =
        kl_gaussian_from_samples(samples, post->mean(), post->covariance());
    const Eigen::MatrixXd draws = gmm_posterior_sample(*post, 10000, rng);
    rep.swd = sliced_wasserstein(samples, draws, rng);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// report writing

void write_diagnostics_csv(const std::filesystem::path& path,
                           const std::vector<DiagnosticsRow>& rows) {
  std::ofstream out(path);
  out << "iteration,rho,span_rank,trace_cov\n";
  out.precision(17);
  for (const auto& r : rows)
    out << r.iteration << ',' << r.rho << ',' << r.span_rank << ','
        << r.trace_cov << '\n';
}

void write_rank_histogram_csv(const std::filesystem::path& path,
                              const std::vector<long>& hist) {
  std::ofstream out(path);
  out << "bin,count\n";
  for (std::size_t i = 0; i < hist.size(); ++i)
    out << i << ',' << hist[i] << '\n';
}

json metrics_to_json(const MetricsReport& rep) {
  json m;
  if (rep.rel_l2) m["rel_l2"] = *rep.rel_l2;
  if (rep.crps) m["crps"] = *rep.crps;
  if (rep.ssr) m["ssr"] = *rep.ssr;
  if (rep.kl_gaussian) m["kl_gaussian"] = *rep.kl_gaussian;
  if (rep.swd) m["swd"] = *rep.swd;
  return m;
}

int do_run(const RunConfig& cfg, bool quiet = false) {
  auto inst = make_test_instance(cfg.instance_name, cfg.n, cfg.sigma_y,
                                 cfg.instance_seed);
  const RunOutput out = execute(cfg, inst);

  std::filesystem::create_directories(cfg.output);
  const std::filesystem::path dir(cfg.output);
  save_ensemble_csv(Ensemble{out.samples}, (dir / "samples.csv").string());
  if (!out.diagnostics.empty())
    write_diagnostics_csv(dir / "diagnostics.csv", out.diagnostics);

  const MetricsReport rep = compute_metrics(cfg, inst, out.samples);
  write_rank_histogram_csv(dir / "rank_histogram.csv", rep.rank_histogram);

  json summary;
  summary["summary_version"] = kSummaryVersion;
  summary["config"] = cfg.echo;
  summary["instance_seed"] = cfg.instance_seed;
  summary["method"] = cfg.method;
  summary["metrics"] = metrics_to_json(rep);
  summary["forward_evals"] = out.forward_evals;
  summary["wall_clock_seconds"] = out.wall_clock_seconds;
  summary["collapse_warning"] = out.collapse_warning;
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';

  if (!quiet)
    std::printf("wrote %s (method %s, %lld forward evals)\n",
                dir.string().c_str(), cfg.method.c_str(),
                static_cast<long long>(out.forward_evals));
  return 0;
}

// ---------------------------------------------------------------------------
// compare

int do_compare(const std::vector<std::string>& config_paths,
               const std::string& out_dir,
               std::optional<std::uint64_t> seed_override) {
  std::vector<RunConfig> cfgs;
  for (const auto& p : config_paths) {
    RunConfig c = parse_config(p);
    if (seed_override) {
      c.instance_seed = *seed_override;
      c.blade.seed = *seed_override;
      c.eks.seed = *seed_override;
    }
    cfgs.push_back(std::move(c));
  }
  for (std::size_t i = 1; i < cfgs.size(); ++i) {
    if (cfgs[i].instance_name != cfgs[0].instance_name ||
        cfgs[i].n != cfgs[0].n || cfgs[i].sigma_y != cfgs[0].sigma_y ||
        cfgs[i].instance_seed != cfgs[0].instance_seed)
      throw ConfigError("compare: instance mismatch between " +
                        config_paths[0] + " and " + config_paths[i]);
  }

  auto inst = make_test_instance(cfgs[0].instance_name, cfgs[0].n,
                                 cfgs[0].sigma_y, cfgs[0].instance_seed);
  const auto post = analytic_posterior(inst);
  std::optional<Eigen::MatrixXd> oracle_draws;
  if (post) {
    RngStream rng(cfgs[0].instance_seed, 0x0eac1eull, 9);
    oracle_draws = gmm_posterior_sample(*post, 10000, rng);
  }

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  std::ofstream scatter(dir / "scatter.csv");
  scatter << "method";
  for (Eigen::Index d = 0; d < inst.model->in_dim(); ++d)
    scatter << ",dim_" << d;
  scatter << '\n';
  scatter.precision(17);

  json table = json::array();
  for (const auto& cfg : cfgs) {
    auto local = make_test_instance(cfg.instance_name, cfg.n, cfg.sigma_y,
                                    cfg.instance_seed);
    const RunOutput out = execute(cfg, local);
    for (Eigen::Index r = 0; r < out.samples.rows(); ++r) {
      scatter << cfg.method;
      for (Eigen::Index d = 0; d < out.samples.cols(); ++d)
        scatter << ',' << out.samples(r, d);
      scatter << '\n';
    }
    const MetricsReport rep = compute_metrics(cfg, local, out.samples);
    json row;
    row["method"] = cfg.method;
    row["metrics"] = metrics_to_json(rep);
    if (oracle_draws) {
      RngStream rng(cfgs[0].instance_seed, 0x3e7811c5ull, 1);
      row["swd_to_oracle"] =
          sliced_wasserstein(out.samples, *oracle_draws, rng);
    }
    if (post && local.prior->components() > 1) {
      // nearest-mode occupancy vs analytic posterior weights
      json occ_row = json::array();
      std::vector<double> occ(post->components(), 0.0);
      for (Eigen::Index r = 0; r < out.samples.rows(); ++r) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < post->components(); ++i) {
          const double d =
              (out.samples.row(r).transpose() - post->means[i]).squaredNorm();
          if (d < best_d) {
            best_d = d;
            best = i;
          }
        }
        occ[best] += 1.0 / out.samples.rows();
      }
      for (int i = 0; i < post->components(); ++i)
        occ_row.push_back({{"mode", i},
                           {"occupancy", occ[i]},
                           {"analytic_weight", post->weights[i]}});
      row["mode_occupancy"] = occ_row;
    }
    table.push_back(std::move(row));
  }

  json report;
  report["summary_version"] = kSummaryVersion;
  report["instance"] = {{"name", cfgs[0].instance_name},
                        {"n", cfgs[0].n},
                        {"seed", cfgs[0].instance_seed}};
  report["methods"] = std::move(table);
  std::ofstream(dir / "compare.json") << report.dump(2) << '\n';
  std::printf("wrote %s\n", (dir / "compare.json").string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

void apply_sweep_value(RunConfig& cfg, const std::string& parameter,
                       const std::string& value) {
  if (parameter == "K")
    cfg.blade.iterations = std::stoi(value);
  else if (parameter == "gamma")
    cfg.blade.likelihood.gamma = std::stod(value);
  else if (parameter == "rho_min")
    cfg.blade.rho_min = std::stod(value);
  else if (parameter == "eff_sigma_y")
    cfg.blade.likelihood.eff_sigma_y = std::stod(value);
  else if (parameter == "J")
    cfg.blade.ensemble_size = std::stol(value);
  else if (parameter == "schedule")
    cfg.blade.schedule = parse_schedule(value);
  else
    throw ConfigError("sweep: unknown parameter " + parameter);
}

int do_sweep(const std::string& config_path, const std::string& parameter,
             const std::vector<std::string>& values,
             const std::string& out_dir,
             std::optional<std::uint64_t> seed_override, int jobs) {
  if (values.empty()) throw ConfigError("sweep: empty value list");
  const RunConfig base = parse_config(config_path);

  struct SweepRow {
    std::string value;
    MetricsReport rep;
    std::int64_t forward_evals = 0;
    std::string error;
  };
  std::vector<SweepRow> rows(values.size());

  const auto worker = [&](std::size_t i) {
    RunConfig cfg = base;
    try {
      apply_sweep_value(cfg, parameter, values[i]);
      if (seed_override) {
        cfg.instance_seed = *seed_override;
        cfg.blade.seed = *seed_override;
      }
      auto inst = make_test_instance(cfg.instance_name, cfg.n, cfg.sigma_y,
                                     cfg.instance_seed);
      const RunOutput out = execute(cfg, inst);
      rows[i].rep = compute_metrics(cfg, inst, out.samples);
      rows[i].forward_evals = out.forward_evals;
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
    rows[i].value = values[i];
  };

  for (std::size_t start = 0; start < values.size();
       start += static_cast<std::size_t>(jobs)) {
    std::vector<std::thread> pool;
    for (std::size_t i = start;
         i < std::min(values.size(), start + static_cast<std::size_t>(jobs));
         ++i)
      pool.emplace_back(worker, i);
    for (auto& t : pool) t.join();
  }

  for (const auto& r : rows) {
    if (!r.error.empty())
      throw std::runtime_error("sweep value " + r.value + ": " + r.error);
  }

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path path =
      std::filesystem::path(out_dir) / "sweep.csv";
  std::ofstream out(path);
  out << "value,crps,ssr,rel_l2,kl,swd,forward_evals\n";
  out.precision(17);
  const auto cell = [&](const std::optional<double>& v) {
    if (v)
      out << *v;
    out << ',';
  };
  for (const auto& r : rows) {
    out << r.value << ',';
    cell(r.rep.crps);
    cell(r.rep.ssr);
    cell(r.rep.rel_l2);
    cell(r.rep.kl_gaussian);
    cell(r.rep.swd);
    out << r.forward_evals << '\n';
  }
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// selftest

int do_selftest() {
  int failures = 0;
  const auto report = [&](const char* name, bool pass) {
    std::printf("[%s] %s\n", pass ? "PASS" : "FAIL", name);
    if (!pass) ++failures;
  };

  {
    // oracle triangle: analytic vs quadrature vs MCMC on a bimodal posterior
    const GmmPrior prior({0.5, 0.5},
                         {Eigen::VectorXd::Constant(1, -2.0),
                          Eigen::VectorXd::Constant(1, 2.0)},
                         {Eigen::MatrixXd::Identity(1, 1),
                          Eigen::MatrixXd::Identity(1, 1)});
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(1, 1);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(1, 1.0);
    const GmmPosterior analytic = gmm_posterior(prior, eye, eye, y);
    const LogDensity log_post = [&](const Eigen::VectorXd& x) {
      const Eigen::MatrixXd row = x.transpose();
      return prior.log_density(row, 0.0)(0) -
             0.5 * (x(0) - 1.0) * (x(0) - 1.0);
    };
    const auto grid = grid_posterior(log_post,
                                     Eigen::VectorXd::Constant(1, -8.0),
                                     Eigen::VectorXd::Constant(1, 8.0),
                                     {2000});
    RngStream rng(97);
    const auto chain =
        rwm_sample(log_post, Eigen::VectorXd::Zero(1), 400000, 2.5, rng);
    const double mu = analytic.mean()(0);
    const double var = analytic.covariance()(0, 0);
    const double chain_mu = chain.samples.col(0).mean();
    report("oracle triangle: grid mean/cov vs analytic",
           std::abs(grid.mean()(0) - mu) < 1e-3 * (1.0 + std::abs(mu)) &&
               std::abs(grid.covariance()(0, 0) - var) < 1e-3 * (1.0 + var));
    report("oracle triangle: mcmc mean vs analytic",
           std::abs(chain_mu - mu) < 0.1);
  }
  {
    // metric equivalence: sorted-form CRPS vs O(J^2) double sum
    RngStream rng(98);
    bool ok = true;
    for (int j_count : {2, 7, 64}) {
      const Eigen::MatrixXd e = 5.0 * rng.normal_matrix(j_count, 2);
      const Eigen::VectorXd truth = rng.normal_vector(2);
      double slow = 0.0;
      for (int d = 0; d < 2; ++d) {
        double t1 = 0.0, t2 = 0.0;
        for (int j = 0; j < j_count; ++j) {
          t1 += std::abs(e(j, d) - truth(d));
          for (int k = 0; k < j_count; ++k)
            t2 += std::abs(e(j, d) - e(k, d));
        }
        slow += t1 / j_count - t2 / (2.0 * j_count * (j_count - 1));
      }
      slow /= 2.0;
      ok = ok && std::abs(crps(e, truth) - slow) <= 1e-10 * (1.0 + slow);
    }
    report("metric equivalence: fast vs brute-force CRPS", ok);
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"derivative-free ensemble posterior sampling harness"};
  app.require_subcommand(1);

  std::vector<std::string> config_paths;
  std::string out_override;
  std::optional<std::uint64_t> seed_override;
  int jobs = 1;
  std::string sweep_parameter;
  std::vector<std::string> sweep_values;

  auto* run = app.add_subcommand("run", "execute one config");
  run->add_option("--config", config_paths, "config file")->required();
  run->add_option("--out", out_override, "output directory override");
  run->add_option("--seed-override", seed_override, "override all run seeds");

  auto* compare =
      app.add_subcommand("compare", "joint report over several configs");
  compare->add_option("--config", config_paths, "config files (repeatable)")
      ->required();
  compare->add_option("--out", out_override, "output directory");
  compare->add_option("--seed-override", seed_override,
                      "override all run seeds");

  auto* sweep = app.add_subcommand("sweep", "one run per parameter value");
  sweep->add_option("--config", config_paths, "base config file")->required();
  sweep->add_option("parameter", sweep_parameter,
                    "K | gamma | rho_min | eff_sigma_y | J | schedule")
      ->required();
  sweep->add_option("values", sweep_values, "parameter values");
  sweep->add_option("--out", out_override, "output directory");
  sweep->add_option("--seed-override", seed_override,
                    "override all run seeds");
  sweep->add_option("--jobs", jobs, "max concurrent runs");

  auto* selftest = app.add_subcommand(
      "selftest", "oracle-triangle and metric-equivalence checks");
  (void)selftest;

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("run")) {
      RunConfig cfg = parse_config(config_paths.front());
      if (!out_override.empty()) cfg.output = out_override;
      if (seed_override) {
        cfg.instance_seed = *seed_override;
        cfg.blade.seed = *seed_override;
        cfg.eks.seed = *seed_override;
      }
      return do_run(cfg);
    }
    if (app.got_subcommand("compare")) {
      return do_compare(config_paths,
                        out_override.empty() ? "compare-out" : out_override,
                        seed_override);
    }
    if (app.got_subcommand("sweep")) {
      return do_sweep(config_paths.front(), sweep_parameter, sweep_values,
                      out_override.empty() ? "sweep-out" : out_override,
                      seed_override, std::max(1, jobs));
    }
    return do_selftest();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return kExitNumerical;
  }
}

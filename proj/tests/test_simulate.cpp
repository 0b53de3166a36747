#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sgdct/errors.hpp"
#include "sgdct/simulate.hpp"

using namespace sgdct;

namespace {

SimConfig basic_config() {
  SimConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 10.0;
  cfg.alpha = {1.0, 1.0};
  cfg.n_paths = 4;
  cfg.snapshot_times = {5.0, 10.0};
  return cfg;
}

}  // namespace

TEST_CASE("em_step: hand-checked updates") {
  const DriftModel ou = DriftModel::make(ModelKind::ou, 1.0);
  // Deterministic Euler step of the data process.
  const auto [x1, th1] = em_step(ou, {1.0, 1.0}, 1.0, 1.0, 0.0, 0.1, 0.0);
  CHECK(x1 == doctest::Approx(0.9));
  (void)th1;

  // X-independent: theta_next = theta + alpha (theta* - theta) dt  (noise off).
  const DriftModel flat = DriftModel::make(ModelKind::x_independent, 2.3);
  const auto [x2, th2] = em_step(flat, {1.0, 1.0}, 0.0, 0.0, 0.0, 0.1, 0.0);
  CHECK(x2 == 0.0);
  CHECK(th2 == doctest::Approx(0.23));

  // Same step with a Brownian increment of 0.2.
  const auto [x3, th3] = em_step(flat, {1.0, 1.0}, 0.0, 0.0, 0.0, 0.1, 0.2);
  CHECK(x3 == 0.0);
  CHECK(th3 == doctest::Approx(0.43));
}

TEST_CASE("zero-noise ensemble collapses to the deterministic recursion") {
  const DriftModel ou = DriftModel::make(ModelKind::ou, 1.0);
  SimConfig cfg = basic_config();
  cfg.x0 = 1.0;
  cfg.zero_noise = true;
  const PathEnsemble ens = run_ensemble(ou, cfg);

  double x = 1.0, th = 0.0;
  std::vector<double> expected;
  for (std::size_t k = 0; k < total_steps(cfg); ++k) {
    const double t = cfg.dt * static_cast<double>(k);
    std::tie(x, th) = em_step(ou, cfg.alpha, x, th, t, cfg.dt, 0.0);
    if (std::abs(t + cfg.dt - 5.0) < 1e-12 || std::abs(t + cfg.dt - 10.0) < 1e-12)
      expected.push_back(x);
  }
  for (std::size_t s = 0; s < ens.snapshot_times.size(); ++s)
    for (int i = 0; i < cfg.n_paths; ++i) CHECK(ens.x[s][i] == expected[s]);
}

TEST_CASE("worker count never changes the numbers") {
  const DriftModel ou = DriftModel::make(ModelKind::ou, 0.5);
  SimConfig cfg = basic_config();
  cfg.n_paths = 64;
  cfg.x0 = 0.3;
  cfg.workers = 1;
  const PathEnsemble a = run_ensemble(ou, cfg);
  cfg.workers = 8;
  const PathEnsemble b = run_ensemble(ou, cfg);
  REQUIRE(a.theta.size() == b.theta.size());
  for (std::size_t s = 0; s < a.theta.size(); ++s)
    for (int i = 0; i < cfg.n_paths; ++i) {
      CHECK(a.theta[s][i] == b.theta[s][i]);
      CHECK(a.x[s][i] == b.x[s][i]);
    }
}

TEST_CASE("substreams are stable under ensemble resizing") {
  const DriftModel ou = DriftModel::make(ModelKind::ou, 0.5);
  SimConfig cfg = basic_config();
  cfg.n_paths = 8;
  const PathEnsemble small = run_ensemble(ou, cfg);
  cfg.n_paths = 16;
  const PathEnsemble large = run_ensemble(ou, cfg);
  for (std::size_t s = 0; s < small.theta.size(); ++s)
    for (int i = 0; i < 8; ++i) CHECK(small.theta[s][i] == large.theta[s][i]);
  REQUIRE(large.substream_seeds.size() == 16);
  for (int i = 0; i < 8; ++i) CHECK(small.substream_seeds[i] == large.substream_seeds[i]);
}

TEST_CASE("zero-noise theta follows the exact ODE solution to first order") {
  // theta' = -alpha_t (theta - theta*) has solution
  // theta* + (theta0 - theta*) (c0 / (c0 + t))^{c_alpha}.
  const DriftModel flat = DriftModel::make(ModelKind::x_independent, 2.3);
  auto run_error = [&](double dt) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 10.0;
    cfg.alpha = {0.8, 1.0};
    cfg.n_paths = 1;
    cfg.zero_noise = true;
    cfg.snapshot_times = {10.0};
    const PathEnsemble ens = run_ensemble(flat, cfg);
    const double exact = 2.3 + (0.0 - 2.3) * std::pow(1.0 / (1.0 + 10.0), 0.8);
    return std::abs(ens.theta[0][0] - exact);
  };
  const double e1 = run_error(0.1);
  const double e2 = run_error(0.05);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 0.9);
}

TEST_CASE("OU weak moments match within 4 standard errors") {
  const double c_star = 0.5;
  const DriftModel ou = DriftModel::make(ModelKind::ou, c_star);
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 2.0;
  cfg.alpha = {0.01, 1.0};  // keep theta quiet; this test watches x
  cfg.x0 = 1.0;
  cfg.n_paths = 20000;
  cfg.master_seed = 99;
  cfg.snapshot_times = {2.0};
  const PathEnsemble ens = run_ensemble(ou, cfg);

  double mean = 0.0;
  for (double v : ens.x[0]) mean += v;
  mean /= cfg.n_paths;
  double var = 0.0;
  for (double v : ens.x[0]) var += (v - mean) * (v - mean);
  var /= (cfg.n_paths - 1);

  const double mean_exact = cfg.x0 * std::exp(-c_star * 2.0);
  const double var_exact = (1.0 - std::exp(-2.0 * c_star * 2.0)) / (2.0 * c_star);
  const double se_mean = std::sqrt(var_exact / cfg.n_paths);
  const double se_var = var_exact * std::sqrt(2.0 / (cfg.n_paths - 1));
  CHECK(std::abs(mean - mean_exact) < 4.0 * se_mean);
  CHECK(std::abs(var - var_exact) < 4.0 * se_var);
}

TEST_CASE("rescaled fluctuation variance approaches the explicit limit") {
  // x-independent, c_alpha = 1, theta0 = 0: t * Var(theta_t) -> 1.
  const DriftModel flat = DriftModel::make(ModelKind::x_independent, 2.3);
  SimConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 5000.0;
  cfg.alpha = {1.0, 1.0};
  cfg.n_paths = 1000;
  cfg.master_seed = 2718;
  cfg.snapshot_times = {5000.0};
  const PathEnsemble ens = run_ensemble(flat, cfg);
  double mean = 0.0;
  for (double v : ens.theta[0]) mean += v;
  mean /= cfg.n_paths;
  double var = 0.0;
  for (double v : ens.theta[0]) var += (v - mean) * (v - mean);
  var /= (cfg.n_paths - 1);
  CHECK(std::abs(5000.0 * var - 1.0) <= 0.15);
}

TEST_CASE("SGDCT_THREADS is the worker fallback") {
  setenv("SGDCT_THREADS", "3", 1);
  CHECK(resolve_workers(0) == 3);
  CHECK(resolve_workers(5) == 5);
  unsetenv("SGDCT_THREADS");
  CHECK(resolve_workers(0) >= 1);
}

TEST_CASE("configuration errors are caught before compute") {
  const DriftModel ou = DriftModel::make(ModelKind::ou, 0.5);
  SimConfig cfg = basic_config();

  cfg.snapshot_times = {5.03};  // off the dt grid
  CHECK_THROWS_AS(run_ensemble(ou, cfg), ConfigError);

  cfg = basic_config();
  cfg.snapshot_times = {10.0, 5.0};
  CHECK_THROWS_AS(validate_config(ou, cfg), ConfigError);

  cfg = basic_config();
  cfg.dt = -0.1;
  CHECK_THROWS_AS(validate_config(ou, cfg), ConfigError);

  cfg = basic_config();
  cfg.alpha.c0 = 0.0;  // singular learning rate at t = 0
  CHECK_THROWS_AS(validate_config(ou, cfg), ConfigError);
  cfg.t_start = 1.0;  // the c0 = 0 convention needs t >= t_start > 0
  CHECK_NOTHROW(validate_config(ou, cfg));
}

TEST_CASE("non-finite paths are flagged and excluded, not absorbed") {
  // A huge dt blows the cubic model up immediately.
  const DriftModel cubic = DriftModel::make(ModelKind::cubic, 0.035);
  SimConfig cfg;
  cfg.dt = 50.0;
  cfg.t_end = 500.0;
  cfg.alpha = {0.01, 1.0};
  cfg.x0 = 5.0;
  cfg.n_paths = 3;
  cfg.snapshot_times = {500.0};
  const PathEnsemble ens = run_ensemble(cubic, cfg);
  CHECK(ens.flagged_count == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::isnan(ens.theta[0][i]));
}

TEST_CASE("full-resolution storage matches the snapshot path") {
  const DriftModel ou = DriftModel::make(ModelKind::ou, 0.5);
  SimConfig cfg = basic_config();
  cfg.store_full_paths = 2;
  const PathEnsemble ens = run_ensemble(ou, cfg);
  REQUIRE(ens.full_paths.size() == 2);
  const FullPath solo = simulate_full_path(ou, cfg, 1);
  for (std::size_t k = 0; k < solo.x.size(); k += 7) {
    CHECK(solo.x[k] == ens.full_paths[1].x[k]);
    CHECK(solo.theta[k] == ens.full_paths[1].theta[k]);
  }
  const std::size_t k_end = step_index(cfg, 10.0);
  CHECK(ens.full_paths[1].x[k_end] == ens.x[1][1]);
}

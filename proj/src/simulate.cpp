#include "sgdct/simulate.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "sgdct/errors.hpp"
#include "sgdct/rng.hpp"

namespace sgdct {

void validate_config(const DriftModel& model, const SimConfig& cfg) {
  (void)model;
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(cfg.t_end > cfg.t_start)) throw ConfigError("t_end must exceed t_start");
  if (!(cfg.alpha.c_alpha > 0.0)) throw ConfigError("c_alpha must be positive");
  if (cfg.alpha.c0 < 0.0) throw ConfigError("c0 must be nonnegative");
  if (cfg.alpha.c0 + cfg.t_start <= 0.0)
    throw ConfigError("c0 = 0 requires t_start > 0 (the learning rate is singular at t = -c0)");
  if (cfg.n_paths < 1) throw ConfigError("n_paths must be >= 1");
  if (cfg.store_full_paths < 0 || cfg.store_full_paths > cfg.n_paths)
    throw ConfigError("store_full_paths must lie in [0, n_paths]");

  const double span = cfg.t_end - cfg.t_start;
  const double steps = span / cfg.dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
    throw ConfigError("t_end - t_start must be a multiple of dt");

  double prev = cfg.t_start;
  for (double t : cfg.snapshot_times) {
    if (!(t > cfg.t_start) || t > cfg.t_end + 1e-9 * std::max(1.0, cfg.t_end)) {
      std::ostringstream msg;
      msg << "snapshot time " << t << " is outside (t_start, t_end]";
      throw ConfigError(msg.str());
    }
    if (!(t > prev)) throw ConfigError("snapshot times must be strictly increasing");
    const double k = (t - cfg.t_start) / cfg.dt;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
      std::ostringstream msg;
      msg << "snapshot time " << t << " is not a multiple of dt = " << cfg.dt;
      throw ConfigError(msg.str());
    }
    if (prev != cfg.t_start && t - prev < cfg.dt - 1e-9)
      throw ConfigError("dt exceeds the smallest snapshot gap");
    prev = t;
  }
}

std::size_t step_index(const SimConfig& cfg, double t) {
  const double k = (t - cfg.t_start) / cfg.dt;
  const double rounded = std::round(k);
  if (std::abs(k - rounded) > 1e-9 * std::max(1.0, k)) {
    std::ostringstream msg;
    msg << "time " << t << " is not on the dt grid (dt = " << cfg.dt << ")";
    throw ConfigError(msg.str());
  }
  return static_cast<std::size_t>(rounded);
}

std::size_t total_steps(const SimConfig& cfg) {
  return static_cast<std::size_t>(std::round((cfg.t_end - cfg.t_start) / cfg.dt));
}

std::pair<double, double> em_step(const DriftModel& model, const LearningRate& alpha, double x,
                                  double theta, double t, double dt, double dw) {
  const double a = alpha(t);
  const double dx = model.f_star(x) * dt + model.sigma * dw;
  const double x_next = model.has_x_process ? x + dx : x;
  const double theta_next =
      theta + a * model.f_theta(x, theta) / (model.sigma * model.sigma) *
                  (dx - model.f(x, theta) * dt);
  return {x_next, theta_next};
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SGDCT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_chunks(std::size_t n, int workers,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n ? n : 1)));
  if (workers == 1 || n < 2) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t begin = chunk * w;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

namespace {

struct PathResult {
  bool flagged = false;
};

// Runs one path, invoking on_state(k, x, theta) for every grid step k
// (including k = 0) and on_increment(k, dw) after drawing step k's increment.
template <typename StateFn, typename IncrementFn>
PathResult run_path(const DriftModel& model, const SimConfig& cfg, int path_index,
                    StateFn&& on_state, IncrementFn&& on_increment) {
  GaussianStream noise(substream_seed(cfg.master_seed, static_cast<std::uint64_t>(path_index)));
  const std::size_t n_steps = total_steps(cfg);
  const double sqrt_dt = std::sqrt(cfg.dt);
  double x = cfg.x0;
  double theta = cfg.theta0;
  on_state(std::size_t{0}, x, theta);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = cfg.t_start + cfg.dt * static_cast<double>(k);
    const double dw = cfg.zero_noise ? 0.0 : sqrt_dt * noise.normal();
    on_increment(k, dw);
    const auto [x_next, theta_next] = em_step(model, cfg.alpha, x, theta, t, cfg.dt, dw);
    x = x_next;
    theta = theta_next;
    if (!std::isfinite(theta) || (model.has_x_process && !std::isfinite(x))) {
      return {true};
    }
    on_state(k + 1, x, theta);
  }
  return {false};
}

}  // namespace

PathEnsemble run_ensemble(const DriftModel& model, const SimConfig& cfg) {
  validate_config(model, cfg);

  PathEnsemble ens;
  ens.cfg = cfg;
  ens.snapshot_times = cfg.snapshot_times;
  ens.snapshot_steps.reserve(cfg.snapshot_times.size());
  for (double t : cfg.snapshot_times) ens.snapshot_steps.push_back(step_index(cfg, t));

  const std::size_t n_snap = ens.snapshot_steps.size();
  const std::size_t n_paths = static_cast<std::size_t>(cfg.n_paths);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ens.x.assign(n_snap, std::vector<double>(n_paths, nan));
  ens.theta.assign(n_snap, std::vector<double>(n_paths, nan));
  ens.substream_seeds.resize(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i)
    ens.substream_seeds[i] = substream_seed(cfg.master_seed, i);
  ens.flagged.assign(n_paths, 0);
  ens.full_paths.resize(cfg.store_full_paths);

  const std::size_t n_steps = total_steps(cfg);
  parallel_chunks(n_paths, resolve_workers(cfg.workers), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      FullPath* full = nullptr;
      if (i < static_cast<std::size_t>(cfg.store_full_paths)) {
        full = &ens.full_paths[i];
        full->path_index = static_cast<int>(i);
        full->x.assign(n_steps + 1, nan);
        full->theta.assign(n_steps + 1, nan);
        full->dw.assign(n_steps, 0.0);
      }
      std::size_t next_snap = 0;
      const PathResult res = run_path(
          model, cfg, static_cast<int>(i),
          [&](std::size_t k, double x, double theta) {
            while (next_snap < n_snap && ens.snapshot_steps[next_snap] == k) {
              ens.x[next_snap][i] = x;
              ens.theta[next_snap][i] = theta;
              ++next_snap;
            }
            if (full) {
              full->x[k] = x;
              full->theta[k] = theta;
            }
          },
          [&](std::size_t k, double dw) {
            if (full) full->dw[k] = dw;
          });
      if (res.flagged) {
        ens.flagged[i] = 1;
        for (std::size_t s = 0; s < n_snap; ++s) {
          ens.x[s][i] = nan;
          ens.theta[s][i] = nan;
        }
      }
    }
  });

  for (auto flag : ens.flagged) ens.flagged_count += flag;
  return ens;
}

FullPath simulate_full_path(const DriftModel& model, const SimConfig& cfg, int path_index) {
  SimConfig single = cfg;
  single.snapshot_times.clear();
  validate_config(model, single);
  const std::size_t n_steps = total_steps(cfg);
  FullPath path;
  path.path_index = path_index;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  path.x.assign(n_steps + 1, nan);
  path.theta.assign(n_steps + 1, nan);
  path.dw.assign(n_steps, 0.0);
  const PathResult res = run_path(
      model, cfg, path_index,
      [&](std::size_t k, double x, double theta) {
        path.x[k] = x;
        path.theta[k] = theta;
      },
      [&](std::size_t k, double dw) { path.dw[k] = dw; });
  if (res.flagged) throw NumericalError("path " + std::to_string(path_index) +
                                        " went non-finite during full-resolution simulation");
  return path;
}

}  // namespace sgdct

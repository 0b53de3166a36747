#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sgdct/models.hpp"

namespace sgdct {

// alpha_t = c_alpha / (c0 + t)
struct LearningRate {
  double c_alpha = 1.0;
  double c0 = 1.0;
  double operator()(double t) const { return c_alpha / (c0 + t); }
};

struct SimConfig {
  double dt = 0.1;
  double t_end = 100.0;
  double t_start = 0.0;  // must be > 0 when c0 == 0 (alpha is singular at t = -c0)
  LearningRate alpha;
  double x0 = 0.0;
  double theta0 = 0.0;
  int n_paths = 1;
  std::uint64_t master_seed = 12345;
  std::vector<double> snapshot_times;  // strictly increasing, in (t_start, t_end]
  int workers = 0;                     // 0 = auto; performance knob only
  int store_full_paths = 0;            // keep full-resolution (x, theta, dW) for the first k paths
  bool zero_noise = false;             // test hook: forces every dW to 0
};

// Throws ConfigError on any violated precondition (off-grid snapshot times,
// nonpositive dt, dt larger than the smallest snapshot gap, ...).
void validate_config(const DriftModel& model, const SimConfig& cfg);

// Step index of time t on the dt grid; throws ConfigError if t is not a grid
// multiple within 1e-9 relative tolerance.
std::size_t step_index(const SimConfig& cfg, double t);

std::size_t total_steps(const SimConfig& cfg);

// One Euler-Maruyama step of the coupled system. dw is the Brownian increment
// (law N(0, dt)); the same increment drives both the x-update and the
// theta-update, which consumes the increment of x directly:
//   x'     = x + f*(x) dt + sigma dw
//   theta' = theta + alpha(t) f_theta(x,theta) sigma^-2 (dx - f(x,theta) dt)
// For models without an x process, dx stands for f*(x) dt + sigma dw and x is
// left untouched.
std::pair<double, double> em_step(const DriftModel& model, const LearningRate& alpha, double x,
                                  double theta, double t, double dt, double dw);

// Full-resolution record of one trajectory: x[k], theta[k] for k = 0..n_steps,
// dw[k] for k = 0..n_steps-1, all on the dt grid starting at t_start.
struct FullPath {
  int path_index = 0;
  std::vector<double> x;
  std::vector<double> theta;
  std::vector<double> dw;
};

struct PathEnsemble {
  SimConfig cfg;  // resolved copy
  std::vector<double> snapshot_times;
  std::vector<std::size_t> snapshot_steps;
  // [snapshot][path]; NaN for flagged paths.
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> theta;
  std::vector<std::uint64_t> substream_seeds;  // per path
  std::vector<std::uint8_t> flagged;           // per path: went non-finite
  std::size_t flagged_count = 0;
  std::vector<FullPath> full_paths;
};

// Data-parallel over paths; path i draws all of its increments from the
// substream substream_seed(master_seed, i), so output is bit-identical for any
// worker count and stable under ensemble resizing.
PathEnsemble run_ensemble(const DriftModel& model, const SimConfig& cfg);

// One path at full resolution (same stream as path_index inside run_ensemble).
FullPath simulate_full_path(const DriftModel& model, const SimConfig& cfg, int path_index);

// Worker-count resolution: explicit value, else SGDCT_THREADS, else hardware.
int resolve_workers(int requested);

// Runs fn(begin, end) over contiguous index chunks on `workers` threads.
void parallel_chunks(std::size_t n, int workers, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace sgdct

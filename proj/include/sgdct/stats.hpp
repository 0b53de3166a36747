#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sgdct/simulate.hpp"

namespace sgdct {

// Standard normal quantile function (Wichura's AS 241, double precision).
double normal_quantile(double p);

// W1 between equal-size empirical measures: mean absolute difference of order
// statistics. Throws on empty or mismatched sizes.
double w1_empirical(const std::vector<double>& a, const std::vector<double>& b);

// Dedicated standard-normal comparison sample (fixed stream per experiment so
// W1(t) curves are smooth in t).
std::vector<double> gaussian_sample(std::size_t n, std::uint64_t seed);

enum class W1Mode {
  paired_empirical,  // against a same-size fixed-seed Gaussian sample
  quantile           // exact quantile form, Gaussian quantile at midpoints (i - 1/2)/N
};

double w1_vs_gaussian(const std::vector<double>& sample, double mean, double variance, W1Mode mode,
                      std::uint64_t pair_seed = 0);

struct FluctuationStats {
  double mean = 0.0;   // mean of theta over unflagged paths
  double var = 0.0;    // unbiased (N-1) sample variance of theta
  double t_var = 0.0;  // t * var, the simulation estimator of sigma_bar
  std::vector<double> f_sample;  // sqrt(t) (theta_i - theta*)
  std::size_t n_used = 0;
};

FluctuationStats fluctuation_stats(const PathEnsemble& ensemble, double theta_star, double t);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n_points = 0;
};

// Least-squares slope of log v against log t over the window [t_lo, t_hi].
// Throws on fewer than 3 usable points or nonpositive values in the window.
RateFit rate_fit(const std::vector<double>& t, const std::vector<double>& v, double t_lo,
                 double t_hi);

struct RateSeries {
  std::vector<double> t;
  std::vector<double> v;
  std::vector<double> stderr_;
  double fit_t_lo = 0.0;
  double fit_t_hi = 0.0;
  std::optional<double> slope;
  std::optional<double> intercept;
};

}  // namespace sgdct

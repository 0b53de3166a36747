#include "sgdct/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgdct/errors.hpp"
#include "sgdct/rng.hpp"

namespace sgdct {

// Wichura's algorithm AS 241 (PPND16): inverse of the standard normal CDF,
// accurate to ~1e-16 over (0, 1).
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw NumericalError("normal_quantile requires p in (0, 1)");
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

double w1_empirical(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw ConfigError("w1_empirical requires nonempty samples");
  if (a.size() != b.size()) {
    std::ostringstream msg;
    msg << "w1_empirical requires equal sample sizes (got " << a.size() << " and " << b.size()
        << "); no resampling is applied";
    throw ConfigError(msg.str());
  }
  std::vector<double> sa = a;
  std::vector<double> sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) acc += std::abs(sa[i] - sb[i]);
  return acc / static_cast<double>(sa.size());
}

std::vector<double> gaussian_sample(std::size_t n, std::uint64_t seed) {
  GaussianStream stream(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = stream.normal();
  return out;
}

double w1_vs_gaussian(const std::vector<double>& sample, double mean, double variance, W1Mode mode,
                      std::uint64_t pair_seed) {
  if (!(variance > 0.0)) throw NumericalError("w1_vs_gaussian requires positive variance");
  if (sample.empty()) throw ConfigError("w1_vs_gaussian requires a nonempty sample");
  const double sd = std::sqrt(variance);
  if (mode == W1Mode::paired_empirical) {
    std::vector<double> target = gaussian_sample(sample.size(), pair_seed);
    for (auto& z : target) z = mean + sd * z;
    return w1_empirical(sample, target);
  }
  std::vector<double> sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    acc += std::abs(sorted[i] - (mean + sd * normal_quantile(u)));
  }
  return acc / static_cast<double>(n);
}

FluctuationStats fluctuation_stats(const PathEnsemble& ensemble, double theta_star, double t) {
  std::size_t snap = ensemble.snapshot_times.size();
  for (std::size_t s = 0; s < ensemble.snapshot_times.size(); ++s) {
    if (std::abs(ensemble.snapshot_times[s] - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
      snap = s;
      break;
    }
  }
  if (snap == ensemble.snapshot_times.size()) {
    std::ostringstream msg;
    msg << "no snapshot at t = " << t;
    throw ConfigError(msg.str());
  }

  FluctuationStats st;
  const auto& theta = ensemble.theta[snap];
  const double sqrt_t = std::sqrt(t);
  double sum = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (ensemble.flagged[i]) continue;
    sum += theta[i];
    st.f_sample.push_back(sqrt_t * (theta[i] - theta_star));
    ++st.n_used;
  }
  if (st.n_used < 2)
    throw NumericalError("fluctuation statistics need at least 2 unflagged paths");
  st.mean = sum / static_cast<double>(st.n_used);
  // Unbiased (N-1) sample variance; t * var is an acceptance quantity, so the
  // estimator choice is part of the contract.
  double ss = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (ensemble.flagged[i]) continue;
    const double d = theta[i] - st.mean;
    ss += d * d;
  }
  st.var = ss / static_cast<double>(st.n_used - 1);
  st.t_var = t * st.var;
  return st;
}

RateFit rate_fit(const std::vector<double>& t, const std::vector<double>& v, double t_lo,
                 double t_hi) {
  if (t.size() != v.size()) throw ConfigError("rate_fit: t and v must have equal length");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(t[i] > 0.0)) throw NumericalError("rate_fit: nonpositive time in the fit window");
    if (!(v[i] > 0.0)) {
      std::ostringstream msg;
      msg << "rate_fit: nonpositive value " << v[i] << " at t = " << t[i]
          << " (log undefined)";
      throw NumericalError(msg.str());
    }
    const double x = std::log(t[i]);
    const double y = std::log(v[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 3) {
    std::ostringstream msg;
    msg << "rate_fit: window [" << t_lo << ", " << t_hi << "] contains " << n
        << " points, need >= 3";
    throw NumericalError(msg.str());
  }
  const double denom = n * sxx - sx * sx;
  RateFit fit;
  fit.n_points = n;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace sgdct

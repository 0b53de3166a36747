#include "sgdct/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgdct/errors.hpp"
#include "sgdct/stats.hpp"

namespace sgdct {

namespace {

std::size_t anchor_step(const SimConfig& cfg, double r, const char* what) {
  if (r < 1.0 - 1e-12) {
    std::ostringstream msg;
    msg << what << " = " << r << " must be >= 1";
    throw ConfigError(msg.str());
  }
  if (r <= cfg.t_start || r >= cfg.t_end) {
    std::ostringstream msg;
    msg << what << " = " << r << " must lie strictly inside (t_start, t_end)";
    throw ConfigError(msg.str());
  }
  return step_index(cfg, r);  // throws if off the dt grid
}

}  // namespace

FirstOrderTrajectory propagate_first(const FullPath& path, const DriftModel& model,
                                     const SimConfig& cfg, double r) {
  const std::size_t k_r = anchor_step(cfg, r, "anchor r");
  const std::size_t n_steps = path.dw.size();
  if (path.x.size() != n_steps + 1 || path.theta.size() != n_steps + 1)
    throw ConfigError("full path storage is incomplete (x/theta/dw lengths disagree)");

  FirstOrderTrajectory traj;
  traj.r = r;
  traj.start_step = k_r;
  const std::size_t len = n_steps - k_r + 1;
  traj.dx.resize(len);
  traj.dtheta.resize(len);

  traj.dx[0] = 1.0;
  traj.dtheta[0] = cfg.alpha(r) * model.f_theta(path.x[k_r], path.theta[k_r]);
  for (std::size_t k = k_r; k < n_steps; ++k) {
    const double t = cfg.t_start + cfg.dt * static_cast<double>(k);
    const double a = cfg.alpha(t);
    const double x = path.x[k];
    const double theta = path.theta[k];
    const GPartials g = g_partials(model, x, theta);
    const double dxv = traj.dx[k - k_r];
    const double dth = traj.dtheta[k - k_r];
    // D x uses the exact integrating-factor step of its linear equation; the
    // OU case comes out exact and positivity is preserved. D theta has
    // path-dependent coefficients, so it is stepped with Euler.
    traj.dx[k - k_r + 1] = dxv * std::exp(model.f_star_x(x) * cfg.dt);
    traj.dtheta[k - k_r + 1] =
        dth + a * (-g.g_thetatheta * dth - g.g_xtheta * dxv) * cfg.dt +
        a * (model.f_thetatheta(x, theta) * dth + model.f_xtheta(x, theta) * dxv) * path.dw[k];
  }
  return traj;
}

SecondOrderTrajectory propagate_second(const FullPath& path, const FirstOrderTrajectory& first_a,
                                       const FirstOrderTrajectory& first_b,
                                       const DriftModel& model, const SimConfig& cfg) {
  // Canonical anchor order: the derivative is symmetric in (r1, r2), and after
  // the swap the computation below is literally identical, so results for
  // (r2, r1) are bit-for-bit those of (r1, r2).
  const FirstOrderTrajectory& lo = first_a.r <= first_b.r ? first_a : first_b;
  const FirstOrderTrajectory& hi = first_a.r <= first_b.r ? first_b : first_a;

  const std::size_t n_steps = path.dw.size();
  const std::size_t k_lo = lo.start_step;
  const std::size_t k_hi = hi.start_step;
  if (hi.dx.size() != n_steps - k_hi + 1 || lo.dx.size() != n_steps - k_lo + 1)
    throw ConfigError("first-order trajectories do not match the stored path");

  SecondOrderTrajectory traj;
  traj.r1 = lo.r;
  traj.r2 = hi.r;
  traj.start_step = k_hi;
  const std::size_t len = n_steps - k_hi + 1;
  traj.d2x.assign(len, 0.0);
  traj.d2theta.assign(len, 0.0);

  // Initial value gamma: cross terms of the first-order derivatives at the
  // anchors. Derivatives anchored at hi vanish before hi, so for lo < hi only
  // the terms evaluated at the later anchor survive.
  const double a_lo = cfg.alpha(lo.r);
  const double a_hi = cfg.alpha(hi.r);
  const double gamma =
      a_hi * model.f_xtheta(path.x[k_hi], path.theta[k_hi]) * lo.dx_at(k_hi) +
      a_lo * model.f_xtheta(path.x[k_lo], path.theta[k_lo]) * hi.dx_at(k_lo) +
      a_hi * model.f_thetatheta(path.x[k_hi], path.theta[k_hi]) * lo.dtheta_at(k_hi) +
      a_lo * model.f_thetatheta(path.x[k_lo], path.theta[k_lo]) * hi.dtheta_at(k_lo);
  traj.d2theta[0] = gamma;

  for (std::size_t k = k_hi; k < n_steps; ++k) {
    const double t = cfg.t_start + cfg.dt * static_cast<double>(k);
    const double a = cfg.alpha(t);
    const double x = path.x[k];
    const double theta = path.theta[k];
    const GPartials g = g_partials(model, x, theta);
    const double dx1 = lo.dx_at(k);
    const double dx2 = hi.dx_at(k);
    const double dth1 = lo.dtheta_at(k);
    const double dth2 = hi.dtheta_at(k);
    const double d2x = traj.d2x[k - k_hi];
    const double d2th = traj.d2theta[k - k_hi];
    const double cross = dth1 * dx2 + dx1 * dth2;

    // The averaged and fluctuation third-derivative terms telescope, so only
    // g_thetathetatheta(x, theta) appears in the drift source.
    const double source_g = -g.g_thetathetatheta * dth1 * dth2 - g.g_thetathetax * cross -
                            g.g_xxtheta * dx1 * dx2 - g.g_xtheta * d2x;
    const double source_f = model.f_xthetatheta(x, theta) * cross +
                            model.f_thetathetatheta(x, theta) * dth1 * dth2 +
                            model.f_xxtheta(x, theta) * dx1 * dx2 +
                            model.f_xtheta(x, theta) * d2x;
    const double ftt = model.f_thetatheta(x, theta);

    traj.d2x[k - k_hi + 1] = d2x * std::exp(model.f_star_x(x) * cfg.dt) +
                             model.f_star_xx(x) * dx1 * dx2 * cfg.dt;
    traj.d2theta[k - k_hi + 1] = d2th + a * (-g.g_thetatheta * d2th + source_g) * cfg.dt +
                                 a * (ftt * d2th + source_f) * path.dw[k] -
                                 a * a * ftt * source_f * cfg.dt;
  }
  return traj;
}

std::vector<double> default_anchors(const SimConfig& cfg) {
  std::vector<double> anchors;
  for (double frac : {1.0 / 64.0, 1.0 / 16.0, 1.0 / 4.0}) {
    double r = cfg.t_end * frac;
    r = std::max(r, 1.0);
    r = cfg.t_start + std::round((r - cfg.t_start) / cfg.dt) * cfg.dt;
    if (r > cfg.t_start && r < cfg.t_end &&
        (anchors.empty() || r > anchors.back() + 0.5 * cfg.dt))
      anchors.push_back(r);
  }
  return anchors;
}

MomentSeries moment_scaling(const DriftModel& model, const SimConfig& cfg,
                            const MomentScalingRequest& req, double c_gbar) {
  if (req.order != 1 && req.order != 2) throw ConfigError("malliavin order must be 1 or 2");
  if (req.p != 1 && req.p != 2)
    throw ConfigError("malliavin p must be 1 or 2 (higher p explodes the Monte Carlo variance)");
  if (req.sample_times.empty()) throw ConfigError("moment_scaling needs sample times");

  const double r_hi = req.order == 2 ? std::max(req.r1, req.r2) : req.r1;
  std::vector<std::size_t> sample_steps;
  sample_steps.reserve(req.sample_times.size());
  for (double t : req.sample_times) {
    if (t <= r_hi) throw ConfigError("moment sample times must exceed the anchor");
    sample_steps.push_back(step_index(cfg, t));
  }

  MomentSeries series;
  series.order = req.order;
  series.p = req.p;
  series.r1 = req.order == 2 ? std::min(req.r1, req.r2) : req.r1;
  series.r2 = req.order == 2 ? std::max(req.r1, req.r2) : req.r1;
  series.t = req.sample_times;
  series.predicted_exponent = -2.0 * req.p * c_gbar * cfg.alpha.c_alpha;

  // Per-path powers, filled index-ordered so aggregation is deterministic.
  const std::size_t n_paths = static_cast<std::size_t>(cfg.n_paths);
  const std::size_t n_t = sample_steps.size();
  std::vector<double> table(n_paths * n_t);

  parallel_chunks(n_paths, resolve_workers(cfg.workers), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const FullPath path = simulate_full_path(model, cfg, static_cast<int>(i));
      std::vector<double> values(n_t);
      if (req.order == 1) {
        const FirstOrderTrajectory first = propagate_first(path, model, cfg, req.r1);
        for (std::size_t j = 0; j < n_t; ++j) values[j] = first.dtheta_at(sample_steps[j]);
      } else {
        const FirstOrderTrajectory f1 = propagate_first(path, model, cfg, series.r1);
        const FirstOrderTrajectory f2 =
            series.r2 == series.r1 ? f1 : propagate_first(path, model, cfg, series.r2);
        const SecondOrderTrajectory second = propagate_second(path, f1, f2, model, cfg);
        for (std::size_t j = 0; j < n_t; ++j) {
          const std::size_t k = sample_steps[j];
          values[j] = k < second.start_step ? 0.0 : second.d2theta[k - second.start_step];
        }
      }
      for (std::size_t j = 0; j < n_t; ++j) {
        double v = values[j];
        double power = v * v;
        if (req.p == 2) power *= power;
        table[i * n_t + j] = power;
      }
    }
  });

  series.moment.resize(n_t);
  series.stderr_.resize(n_t);
  for (std::size_t j = 0; j < n_t; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) mean += table[i * n_t + j];
    mean /= static_cast<double>(n_paths);
    // Jackknife standard error of the mean (leave-one-out).
    double ss = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
      const double d = table[i * n_t + j] - mean;
      ss += d * d;
    }
    series.moment[j] = mean;
    series.stderr_[j] =
        n_paths > 1 ? std::sqrt(ss / (static_cast<double>(n_paths) *
                                      static_cast<double>(n_paths - 1)))
                    : 0.0;
  }

  double t_lo = req.fit_t_lo;
  double t_hi = req.fit_t_hi;
  if (t_lo == 0.0 && t_hi == 0.0) {
    // Default window: upper half of the sample grid. The derivative-moment
    // bounds hold for t large; the window is a parameter rather than a fixed
    // burn-in.
    t_lo = series.t[series.t.size() / 2];
    t_hi = series.t.back();
  }
  try {
    const RateFit fit = rate_fit(series.t, series.moment, t_lo, t_hi);
    series.fitted_slope = fit.slope;
  } catch (const std::exception& e) {
    series.fit_error = e.what();
  }
  return series;
}

}  // namespace sgdct

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgdct/simulate.hpp"

namespace sgdct {

// First-order derivative pair (D_r x_t, D_r theta_t) along one path, for
// t >= r. Values are indexed by step offset from start_step.
struct FirstOrderTrajectory {
  double r = 0.0;
  std::size_t start_step = 0;
  std::vector<double> dx;      // D_r x_t; always > 0 (exponential stepping)
  std::vector<double> dtheta;  // D_r theta_t

  double dx_at(std::size_t step) const { return step < start_step ? 0.0 : dx[step - start_step]; }
  double dtheta_at(std::size_t step) const {
    return step < start_step ? 0.0 : dtheta[step - start_step];
  }
};

// Second-order derivative pair for an anchor pair (r1, r2), stored with
// r1 <= r2 (the derivative is symmetric in the anchors).
struct SecondOrderTrajectory {
  double r1 = 0.0;
  double r2 = 0.0;
  std::size_t start_step = 0;  // step of r1 v r2
  std::vector<double> d2x;
  std::vector<double> d2theta;
};

// Discretizes the first-order derivative SDEs along a stored path:
//   D_r x:     D x(r) = 1,  exact exponential step  Dx' = Dx exp(f*_x dt)
//   D_r theta: D theta(r) = alpha(r) f_theta(x_r, theta_r),
//              Euler step with drift  -alpha (g_tt D theta + g_xt D x)
//              and noise  alpha (f_tt D theta + f_xt D x) dW.
// The anchor must sit on the dt grid and satisfy r >= 1.
FirstOrderTrajectory propagate_first(const FullPath& path, const DriftModel& model,
                                     const SimConfig& cfg, double r);

// Discretizes the second-order SDEs using two already-propagated first-order
// trajectories on the same path. Anchors are canonicalized (sorted), so the
// result is bit-identical under anchor exchange.
SecondOrderTrajectory propagate_second(const FullPath& path, const FirstOrderTrajectory& first_a,
                                       const FirstOrderTrajectory& first_b, const DriftModel& model,
                                       const SimConfig& cfg);

struct MomentScalingRequest {
  int order = 1;  // 1 or 2
  int p = 1;      // moment E[(D theta)^(2p)]; 1 or 2
  double r1 = 0.0;
  double r2 = 0.0;  // ignored for order 1
  std::vector<double> sample_times;
  // Log-log fit window; 0/0 = upper half of the sample grid.
  double fit_t_lo = 0.0;
  double fit_t_hi = 0.0;
};

struct MomentSeries {
  int order = 1;
  int p = 1;
  double r1 = 0.0;
  double r2 = 0.0;
  std::vector<double> t;
  std::vector<double> moment;
  std::vector<double> stderr_;  // jackknife standard error of the mean
  double predicted_exponent = 0.0;
  std::optional<double> fitted_slope;
  std::string fit_error;  // non-empty when the fit could not be made
};

// Monte Carlo estimate of E[(D theta_t)^(2p)] over cfg.n_paths paths (each
// simulated at full resolution from its own substream and discarded), with a
// log-log slope fit against the predicted exponent -2p c_gbar c_alpha.
MomentSeries moment_scaling(const DriftModel& model, const SimConfig& cfg,
                            const MomentScalingRequest& req, double c_gbar);

// Default anchors t_end/64, t_end/16, t_end/4, snapped to the dt grid and
// clamped to >= 1.
std::vector<double> default_anchors(const SimConfig& cfg);

}  // namespace sgdct

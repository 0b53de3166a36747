#pragma once

#include <optional>
#include <vector>

#include "sgdct/models.hpp"

namespace sgdct {

// Centered solution of  f* v_x + (sigma^2/2) v_xx = H  on the density grid,
// built from the 1D quadrature representation (m v_x)' = (2/sigma^2) m H.
struct PoissonSolution {
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> v_x;
  double centering_residual = 0.0;         // |int v dmu| after centering
  double source_centering_residual = 0.0;  // |int H dmu|
  // Max gap between the lower-tail and upper-tail quadrature forms of v_x,
  // taken where the density is numerically resolvable. Health metric.
  double vx_mismatch = 0.0;
};

PoissonSolution solve_poisson(const std::vector<double>& H, const DriftModel& model,
                              const DensityTable& density);

// integral of (d^order g / d theta^order)(x, theta) against the invariant
// measure. `density` may be null for models without an x process.
double gbar(const DriftModel& model, const DensityTable* density, double theta, int order);

enum class VarianceRegime { convergent, divergent };

struct VarianceReport {
  double c_gbar = 0.0;  // gbar_thetatheta at theta*
  double h_bar = 0.0;
  std::optional<double> sigma_bar;  // present only in the convergent regime
  VarianceRegime regime = VarianceRegime::divergent;
};

// Limiting variance of sqrt(t)(theta_t - theta*):
//   sigma_bar = c_alpha^2 h_bar / (2 (c_alpha c_gbar - 1/2)),  c_alpha c_gbar > 1/2,
// with h_bar = int sigma^2 [f_theta sigma^-2 - Psi_x]^2 dmu and Psi the
// centered solution of L_x Psi = gbar_theta - g_theta at theta*. Psi is always
// run through the solver (for well-specified models it comes back ~0).
VarianceReport limiting_variance(const DriftModel& model, const DensityTable* density,
                                 double theta_star, double c_alpha);

}  // namespace sgdct

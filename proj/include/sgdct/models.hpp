#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace sgdct {

enum class ModelKind { x_independent, ou, cubic };

ModelKind parse_model_kind(std::string_view name);
std::string_view model_kind_name(ModelKind kind);

// A drift pair (f*, f) with every partial derivative the simulator and the
// derivative-propagation SDEs consume. The three builtin families are all
// linear in theta, so the pure-theta partials of order >= 2 vanish; the
// accessors still exist because the propagation formulas are written for the
// general case.
struct DriftModel {
  ModelKind kind = ModelKind::ou;
  double theta_star = 1.0;
  double sigma = 1.0;
  bool has_x_process = true;

  static DriftModel make(ModelKind kind, double theta_star, double sigma = 1.0);
  static DriftModel make(std::string_view kind_name, double theta_star, double sigma = 1.0);

  // True drift f*(x) and its x-derivatives.
  double f_star(double x) const;
  double f_star_x(double x) const;
  double f_star_xx(double x) const;

  // (2/sigma^2) * integral_0^x f*(y) dy, in closed form per model. The
  // invariant density is proportional to exp(potential).
  double potential(double x) const;

  // Model f(x, theta) and mixed partials.
  double f(double x, double theta) const;
  double f_x(double x, double theta) const;
  double f_xx(double x, double theta) const;
  double f_theta(double x, double theta) const;
  double f_xtheta(double x, double theta) const;
  double f_xxtheta(double x, double theta) const;
  double f_thetatheta(double /*x*/, double /*theta*/) const { return 0.0; }
  double f_thetathetatheta(double /*x*/, double /*theta*/) const { return 0.0; }
  double f_xthetatheta(double /*x*/, double /*theta*/) const { return 0.0; }
};

// Partials of the distance function g(x,theta) = (1/2) sigma^-2 (f - f*)^2,
// derived from f/f* partials by the chain rule. Symmetric mixed partials are
// represented once (g_xtheta == g_thetax, g_thetathetax == g_thetaxtheta).
struct GPartials {
  double g_theta = 0;
  double g_thetatheta = 0;
  double g_thetathetatheta = 0;
  double g_xtheta = 0;
  double g_thetathetax = 0;
  double g_xxtheta = 0;
};

double g_value(const DriftModel& model, double x, double theta);
GPartials g_partials(const DriftModel& model, double x, double theta);

// Probes the model on a grid; returns human-readable warnings (ergodicity
// proxy f*_x <= 0 violations). Throws on hard invariant violations
// (sigma <= 0, non-finite partials).
std::vector<std::string> validate_model(const DriftModel& model);

struct QuadratureGrid {
  double half_width = 0.0;       // 0 = choose automatically from the stationary sd
  int n_points = (1 << 14) + 1;  // odd, uniform, symmetric
};

// Normalized invariant density on a uniform symmetric grid.
struct DensityTable {
  std::vector<double> x;
  std::vector<double> m;  // trapezoid-normalized: integral == 1
  double dx = 0.0;
  double half_width = 0.0;
  double tail_mass = 0.0;  // Laplace estimate of the mass outside [-L, L]

  // Composite trapezoid of `values` over the grid.
  double trapezoid(const std::vector<double>& values) const;
  // integral f(x) m(x) dx.
  double integrate(const std::function<double(double)>& f) const;
  double moment(int k) const;
};

DensityTable invariant_density(const DriftModel& model, QuadratureGrid grid = {});

}  // namespace sgdct

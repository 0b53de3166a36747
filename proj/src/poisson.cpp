#include "sgdct/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgdct/errors.hpp"

namespace sgdct {

namespace {

// Grid derivative, second order (central interior, one-sided ends). Feeds the
// Euler-Maclaurin endpoint correction below.
std::vector<double> grid_derivative(const std::vector<double>& f, double dx) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
  return d;
}

// Cumulative trapezoid from the left edge with the (h^2/12)(F'(x) - F'(a))
// endpoint correction, making the moving-limit integral fourth order.
std::vector<double> prefix_integral(const std::vector<double>& integrand, double dx) {
  const std::vector<double> d = grid_derivative(integrand, dx);
  const double c = dx * dx / 12.0;
  std::vector<double> out(integrand.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 1; i < integrand.size(); ++i) {
    acc += 0.5 * dx * (integrand[i - 1] + integrand[i]);
    out[i] = acc - c * (d[i] - d[0]);
  }
  return out;
}

// Suffix form, summed tail-first so tail values are not swamped by bulk-scale
// rounding.
std::vector<double> suffix_integral(const std::vector<double>& integrand, double dx) {
  const std::vector<double> d = grid_derivative(integrand, dx);
  const double c = dx * dx / 12.0;
  const std::size_t n = integrand.size();
  std::vector<double> out(n, 0.0);
  double acc = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    acc += 0.5 * dx * (integrand[i] + integrand[i + 1]);
    out[i] = acc - c * (d[n - 1] - d[i]);
  }
  return out;
}

}  // namespace

PoissonSolution solve_poisson(const std::vector<double>& H, const DriftModel& model,
                              const DensityTable& density) {
  const std::size_t n = density.x.size();
  if (H.size() != n) throw ConfigError("poisson source H must be sampled on the density grid");

  std::vector<double> hm(n);
  for (std::size_t i = 0; i < n; ++i) hm[i] = H[i] * density.m[i];

  const double source_residual = density.trapezoid(hm);
  if (std::abs(source_residual) >= 1e-6) {
    std::ostringstream msg;
    msg << "poisson source violates the centering condition: |int H dmu| = "
        << std::abs(source_residual);
    throw NumericalError(msg.str());
  }

  // (m v_x)' = (2/sigma^2) m H, so m v_x equals the lower-tail integral of mH,
  // and by centering also minus the upper-tail integral. The lower form loses
  // all precision in the right tail (the bulk contributions cancel down to
  // m-scale there), so each half of the domain uses the integral coming from
  // its own tail. Both forms are linear in H; their gap over the resolvable
  // region is reported as vx_mismatch.
  const std::vector<double> lower = prefix_integral(hm, density.dx);
  const std::vector<double> upper = suffix_integral(hm, density.dx);
  const std::size_t mode =
      std::max_element(density.m.begin(), density.m.end()) - density.m.begin();
  const double m_floor = density.m[mode] * 1e-8;
  const double scale = 2.0 / (model.sigma * model.sigma);

  PoissonSolution sol;
  sol.x = density.x;
  sol.v_x.resize(n);
  sol.v.resize(n);
  sol.source_centering_residual = std::abs(source_residual);
  for (std::size_t i = 0; i < n; ++i) {
    const double num = (i <= mode) ? lower[i] : -upper[i];
    sol.v_x[i] = scale * num / density.m[i];
    if (density.m[i] >= m_floor) {
      const double gap = std::abs(scale * lower[i] / density.m[i] -
                                  scale * (-upper[i]) / density.m[i]);
      sol.vx_mismatch = std::max(sol.vx_mismatch, gap);
    }
  }

  sol.v = prefix_integral(sol.v_x, density.dx);

  std::vector<double> vm(n);
  for (std::size_t i = 0; i < n; ++i) vm[i] = sol.v[i] * density.m[i];
  const double mean = density.trapezoid(vm);
  for (std::size_t i = 0; i < n; ++i) sol.v[i] -= mean;

  for (std::size_t i = 0; i < n; ++i) vm[i] = sol.v[i] * density.m[i];
  sol.centering_residual = std::abs(density.trapezoid(vm));
  if (sol.centering_residual >= 1e-8)
    throw NumericalError("poisson solution failed to center: residual " +
                         std::to_string(sol.centering_residual));
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!std::isfinite(sol.v_x[i]))
      throw NumericalError("poisson solution v_x is non-finite in the interior");
  }
  return sol;
}

double gbar(const DriftModel& model, const DensityTable* density, double theta, int order) {
  if (order < 0 || order > 3) throw ConfigError("gbar order must be in {0,1,2,3}");
  auto partial = [&](double x) {
    switch (order) {
      case 0: return g_value(model, x, theta);
      case 1: return g_partials(model, x, theta).g_theta;
      case 2: return g_partials(model, x, theta).g_thetatheta;
      default: return g_partials(model, x, theta).g_thetathetatheta;
    }
  };
  if (!model.has_x_process) return partial(0.0);  // g does not depend on x
  if (density == nullptr) throw ConfigError("gbar requires an invariant density for this model");
  const double value = density->integrate(partial);
  if (!std::isfinite(value)) throw NumericalError("gbar integrand is non-finite");
  return value;
}

VarianceReport limiting_variance(const DriftModel& model, const DensityTable* density,
                                 double theta_star, double c_alpha) {
  VarianceReport report;
  report.c_gbar = gbar(model, density, theta_star, 2);

  const double inv_s2 = 1.0 / (model.sigma * model.sigma);
  if (model.has_x_process) {
    if (density == nullptr)
      throw ConfigError("limiting_variance requires an invariant density for this model");
    // Psi solves L_x Psi = gbar_theta - g_theta at theta*. Computed through the
    // solver even though well-specified models give Psi = 0; seeing ~0 come out
    // is part of the pipeline's health check.
    const double gbar_theta = gbar(model, density, theta_star, 1);
    std::vector<double> H(density->x.size());
    for (std::size_t i = 0; i < H.size(); ++i)
      H[i] = gbar_theta - g_partials(model, density->x[i], theta_star).g_theta;
    const PoissonSolution psi = solve_poisson(H, model, *density);
    std::vector<double> h(density->x.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double d = model.f_theta(density->x[i], theta_star) * inv_s2 - psi.v_x[i];
      h[i] = model.sigma * model.sigma * d * d * density->m[i];
    }
    report.h_bar = density->trapezoid(h);
  } else {
    const double d = model.f_theta(0.0, theta_star) * inv_s2;
    report.h_bar = model.sigma * model.sigma * d * d;
  }

  // The s-integral of the limiting variance is a pure exponential; evaluate in
  // closed form. It converges iff c_alpha * gbar_thetatheta(theta*) > 1/2.
  const double rate = c_alpha * report.c_gbar - 0.5;
  if (rate > 0.0) {
    report.regime = VarianceRegime::convergent;
    report.sigma_bar = c_alpha * c_alpha * report.h_bar / (2.0 * rate);
  } else {
    report.regime = VarianceRegime::divergent;
  }
  return report;
}

}  // namespace sgdct

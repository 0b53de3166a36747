#include "sgdct/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sgdct/errors.hpp"

namespace sgdct {

ModelKind parse_model_kind(std::string_view name) {
  if (name == "x_independent") return ModelKind::x_independent;
  if (name == "ou") return ModelKind::ou;
  if (name == "cubic") return ModelKind::cubic;
  throw ConfigError("unknown model \"" + std::string(name) +
                    "\" (expected x_independent | ou | cubic)");
}

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::x_independent: return "x_independent";
    case ModelKind::ou: return "ou";
    case ModelKind::cubic: return "cubic";
  }
  return "?";
}

DriftModel DriftModel::make(ModelKind kind, double theta_star, double sigma) {
  DriftModel m;
  m.kind = kind;
  m.theta_star = theta_star;
  m.sigma = sigma;
  m.has_x_process = (kind != ModelKind::x_independent);
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (!m.has_x_process && theta_star == 0.0) {
    // allowed: f* = 0. Nothing to check.
  }
  if ((kind == ModelKind::ou || kind == ModelKind::cubic) && !(theta_star > 0.0))
    throw ConfigError("theta_star must be positive for the ou and cubic models (ergodicity)");
  return m;
}

DriftModel DriftModel::make(std::string_view kind_name, double theta_star, double sigma) {
  return make(parse_model_kind(kind_name), theta_star, sigma);
}

double DriftModel::f_star(double x) const {
  switch (kind) {
    case ModelKind::x_independent: return theta_star;
    case ModelKind::ou: return -theta_star * x;
    case ModelKind::cubic: return -theta_star * x * x * x;
  }
  return 0.0;
}

double DriftModel::f_star_x(double x) const {
  switch (kind) {
    case ModelKind::x_independent: return 0.0;
    case ModelKind::ou: return -theta_star;
    case ModelKind::cubic: return -3.0 * theta_star * x * x;
  }
  return 0.0;
}

double DriftModel::f_star_xx(double x) const {
  switch (kind) {
    case ModelKind::x_independent: return 0.0;
    case ModelKind::ou: return 0.0;
    case ModelKind::cubic: return -6.0 * theta_star * x;
  }
  return 0.0;
}

double DriftModel::potential(double x) const {
  const double s2 = sigma * sigma;
  switch (kind) {
    case ModelKind::x_independent: return 2.0 * theta_star * x / s2;
    case ModelKind::ou: return -theta_star * x * x / s2;
    case ModelKind::cubic: return -theta_star * x * x * x * x / (2.0 * s2);
  }
  return 0.0;
}

double DriftModel::f(double x, double theta) const {
  switch (kind) {
    case ModelKind::x_independent: return theta;
    case ModelKind::ou: return -theta * x;
    case ModelKind::cubic: return -theta * x * x * x;
  }
  return 0.0;
}

double DriftModel::f_x(double x, double theta) const {
  switch (kind) {
    case ModelKind::x_independent: return 0.0;
    case ModelKind::ou: return -theta;
    case ModelKind::cubic: return -3.0 * theta * x * x;
  }
  return 0.0;
}

double DriftModel::f_xx(double x, double theta) const {
  switch (kind) {
    case ModelKind::x_independent: return 0.0;
    case ModelKind::ou: return 0.0;
    case ModelKind::cubic: return -6.0 * theta * x;
  }
  return 0.0;
}

double DriftModel::f_theta(double x, double /*theta*/) const {
  switch (kind) {
    case ModelKind::x_independent: return 1.0;
    case ModelKind::ou: return -x;
    case ModelKind::cubic: return -x * x * x;
  }
  return 0.0;
}

double DriftModel::f_xtheta(double x, double /*theta*/) const {
  switch (kind) {
    case ModelKind::x_independent: return 0.0;
    case ModelKind::ou: return -1.0;
    case ModelKind::cubic: return -3.0 * x * x;
  }
  return 0.0;
}

double DriftModel::f_xxtheta(double x, double /*theta*/) const {
  switch (kind) {
    case ModelKind::x_independent: return 0.0;
    case ModelKind::ou: return 0.0;
    case ModelKind::cubic: return -6.0 * x;
  }
  return 0.0;
}

double g_value(const DriftModel& model, double x, double theta) {
  const double e = model.f(x, theta) - model.f_star(x);
  return 0.5 * e * e / (model.sigma * model.sigma);
}

namespace {

void require_finite(double value, const char* name, double x, double theta) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << name << " is non-finite at (x=" << x << ", theta=" << theta << ")";
    throw NumericalError(msg.str());
  }
}

}  // namespace

GPartials g_partials(const DriftModel& model, double x, double theta) {
  const double inv_s2 = 1.0 / (model.sigma * model.sigma);
  const double e = model.f(x, theta) - model.f_star(x);
  const double ex = model.f_x(x, theta) - model.f_star_x(x);
  const double exx = model.f_xx(x, theta) - model.f_star_xx(x);
  const double ft = model.f_theta(x, theta);
  const double ftt = model.f_thetatheta(x, theta);
  const double fttt = model.f_thetathetatheta(x, theta);
  const double fxt = model.f_xtheta(x, theta);
  const double fxtt = model.f_xthetatheta(x, theta);
  const double fxxt = model.f_xxtheta(x, theta);

  GPartials g;
  g.g_theta = inv_s2 * e * ft;
  g.g_thetatheta = inv_s2 * (ft * ft + e * ftt);
  g.g_thetathetatheta = inv_s2 * (3.0 * ft * ftt + e * fttt);
  g.g_xtheta = inv_s2 * (ex * ft + e * fxt);
  g.g_thetathetax = inv_s2 * (2.0 * ft * fxt + ex * ftt + e * fxtt);
  g.g_xxtheta = inv_s2 * (exx * ft + 2.0 * ex * fxt + e * fxxt);

  require_finite(g.g_theta, "g_theta", x, theta);
  require_finite(g.g_thetatheta, "g_thetatheta", x, theta);
  require_finite(g.g_thetathetatheta, "g_thetathetatheta", x, theta);
  require_finite(g.g_xtheta, "g_xtheta", x, theta);
  require_finite(g.g_thetathetax, "g_thetathetax", x, theta);
  require_finite(g.g_xxtheta, "g_xxtheta", x, theta);
  return g;
}

std::vector<std::string> validate_model(const DriftModel& model) {
  if (!(model.sigma > 0.0)) throw ConfigError("sigma must be positive");
  std::vector<std::string> warnings;
  for (int i = -20; i <= 20; ++i) {
    const double x = 0.25 * i;
    const double fsx = model.f_star_x(x);
    for (double value : {model.f_star(x), fsx, model.f_star_xx(x), model.f(x, model.theta_star),
                         model.f_theta(x, model.theta_star), model.f_xtheta(x, model.theta_star)}) {
      if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "non-finite model partial at x=" << x;
        throw NumericalError(msg.str());
      }
    }
    if (model.has_x_process && fsx > -1e-12) {
      std::ostringstream msg;
      msg << "ergodicity proxy violated: f_star_x(" << x << ") = " << fsx
          << " is not strictly negative";
      warnings.push_back(msg.str());
    }
  }
  return warnings;
}

double DensityTable::trapezoid(const std::vector<double>& values) const {
  double acc = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) acc += values[i];
  return acc * dx;
}

double DensityTable::integrate(const std::function<double(double)>& f) const {
  std::vector<double> values(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) values[i] = f(x[i]) * m[i];
  return trapezoid(values);
}

double DensityTable::moment(int k) const {
  return integrate([k](double xi) { return std::pow(xi, k); });
}

namespace {

struct RawDensity {
  std::vector<double> x;
  std::vector<double> m;  // normalized
  double dx = 0.0;
  bool mode_on_boundary = false;
  double edge_ratio = 0.0;  // max(m_edge) / max(m)
};

RawDensity build_density(const DriftModel& model, double half_width, int n) {
  RawDensity d;
  d.x.resize(n);
  d.m.resize(n);
  d.dx = 2.0 * half_width / (n - 1);
  double u_max = -std::numeric_limits<double>::infinity();
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) {
    d.x[i] = -half_width + d.dx * i;
    u[i] = model.potential(d.x[i]);
    u_max = std::max(u_max, u[i]);
  }
  for (int i = 0; i < n; ++i) d.m[i] = std::exp(u[i] - u_max);
  const auto mode = std::max_element(d.m.begin(), d.m.end());
  d.mode_on_boundary = (mode == d.m.begin() || mode == d.m.end() - 1);

  double z = 0.5 * (d.m.front() + d.m.back());
  for (int i = 1; i + 1 < n; ++i) z += d.m[i];
  z *= d.dx;
  if (!(z > 0.0) || !std::isfinite(z))
    throw NumericalError("invariant density is not normalizable on the probe domain");
  for (int i = 0; i < n; ++i) d.m[i] /= z;
  d.edge_ratio = std::max(d.m.front(), d.m.back()) / *std::max_element(d.m.begin(), d.m.end());
  return d;
}

double stationary_sd(const RawDensity& d) {
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    const double w = (i == 0 || i + 1 == d.x.size()) ? 0.5 : 1.0;
    m1 += w * d.x[i] * d.m[i];
    m2 += w * d.x[i] * d.x[i] * d.m[i];
  }
  m1 *= d.dx;
  m2 *= d.dx;
  return std::sqrt(std::max(m2 - m1 * m1, 0.0));
}

}  // namespace

DensityTable invariant_density(const DriftModel& model, QuadratureGrid grid) {
  if (!model.has_x_process)
    throw NumericalError("invariant density is non-integrable: the model has no x process");
  if (grid.n_points < 9 || grid.n_points % 2 == 0)
    throw ConfigError("quadrature n_points must be odd and >= 9");

  constexpr double kTailCriterion = 1e-12;
  double half_width = grid.half_width;
  if (half_width <= 0.0) {
    // L = 8 * stationary sd, found by fixed point on a coarse grid. Quartic and
    // quadratic tails decay super-polynomially, so a handful of rounds settle.
    half_width = std::max(4.0 * model.sigma, 1.0);
    for (int round = 0; round < 10; ++round) {
      RawDensity coarse = build_density(model, half_width, 4097);
      if (coarse.mode_on_boundary)
        throw NumericalError("invariant density is non-integrable: mass accumulates at the domain "
                             "boundary (drift points outward)");
      const double target = 8.0 * stationary_sd(coarse);
      if (std::abs(target - half_width) <= 0.05 * half_width) {
        half_width = target;
        break;
      }
      half_width = target;
    }
  }

  for (int attempt = 0;; ++attempt) {
    RawDensity d = build_density(model, half_width, grid.n_points);
    if (d.mode_on_boundary)
      throw NumericalError("invariant density is non-integrable: mass accumulates at the domain "
                           "boundary (drift points outward)");
    if (d.edge_ratio > kTailCriterion) {
      if (grid.half_width > 0.0 || attempt >= 4) {
        std::ostringstream msg;
        msg << "domain too small: m(+/-L)/max(m) = " << d.edge_ratio << " exceeds "
            << kTailCriterion << " at L = " << half_width;
        throw NumericalError(msg.str());
      }
      half_width *= 2.0;
      continue;
    }
    DensityTable table;
    table.x = std::move(d.x);
    table.m = std::move(d.m);
    table.dx = d.dx;
    table.half_width = half_width;
    // Laplace tail estimate: int_L^inf m ~ m(L) sigma^2 / (2 |f*(L)|), per side.
    const double s2 = model.sigma * model.sigma;
    const double fr = model.f_star(half_width);
    const double fl = model.f_star(-half_width);
    double tail = 0.0;
    if (fr < 0.0) tail += table.m.back() * s2 / (-2.0 * fr);
    if (fl > 0.0) tail += table.m.front() * s2 / (2.0 * fl);
    table.tail_mass = tail;
    return table;
  }
}

}  // namespace sgdct

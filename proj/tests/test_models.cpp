#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sgdct/errors.hpp"
#include "sgdct/models.hpp"

using namespace sgdct;

namespace {

// Distance function straight from f / f*, independent of the chain-rule code.
double g_direct(const DriftModel& m, double x, double th) {
  const double e = m.f(x, th) - m.f_star(x);
  return 0.5 * e * e / (m.sigma * m.sigma);
}

struct FdPartials {
  double g_theta, g_thetatheta, g_thetathetatheta, g_xtheta, g_thetathetax, g_xxtheta;
};

FdPartials fd_partials(const DriftModel& m, double x, double th) {
  auto g = [&](double xx, double tt) { return g_direct(m, xx, tt); };
  FdPartials fd;
  {
    const double h = 1e-6;
    fd.g_theta = (g(x, th + h) - g(x, th - h)) / (2 * h);
  }
  {
    const double h = 1e-4;
    fd.g_thetatheta = (g(x, th + h) - 2 * g(x, th) + g(x, th - h)) / (h * h);
    fd.g_xtheta =
        (g(x + h, th + h) - g(x + h, th - h) - g(x - h, th + h) + g(x - h, th - h)) / (4 * h * h);
  }
  {
    const double h = 1e-3;
    fd.g_thetathetatheta =
        (g(x, th + 2 * h) - 2 * g(x, th + h) + 2 * g(x, th - h) - g(x, th - 2 * h)) /
        (2 * h * h * h);
    fd.g_thetathetax = ((g(x + h, th + h) - 2 * g(x + h, th) + g(x + h, th - h)) -
                        (g(x - h, th + h) - 2 * g(x - h, th) + g(x - h, th - h))) /
                       (2 * h * h * h);
    fd.g_xxtheta = ((g(x + h, th + h) - g(x + h, th - h)) - 2 * (g(x, th + h) - g(x, th - h)) +
                    (g(x - h, th + h) - g(x - h, th - h))) /
                   (2 * h * h * h);
  }
  return fd;
}

void check_close(double chain, double fd, const char* name) {
  const double tol = 1e-5 * std::max(1.0, std::abs(chain));
  INFO(name << ": chain=" << chain << " fd=" << fd);
  CHECK(std::abs(chain - fd) <= tol);
}

}  // namespace

TEST_CASE("g partials: hand oracles") {
  const double c_star = 0.7;
  const DriftModel ou = DriftModel::make(ModelKind::ou, c_star);

  // Model equals truth at theta*.
  CHECK(g_partials(ou, 2.0, c_star).g_theta == doctest::Approx(0.0));

  // g_theta = sigma^-2 (f - f*) f_theta = x^2 (theta - c*).
  const GPartials at = g_partials(ou, 1.0, c_star + 1.0);
  CHECK(at.g_theta == doctest::Approx(1.0));
  CHECK(at.g_thetatheta == doctest::Approx(1.0));

  const DriftModel cubic = DriftModel::make(ModelKind::cubic, 0.035);
  for (double x : {-1.5, -0.3, 0.9, 2.0}) {
    CHECK(g_partials(cubic, x, 0.2).g_thetatheta == doctest::Approx(std::pow(x, 6)));
  }
}

TEST_CASE("g partials agree with central finite differences on the probe set") {
  const struct {
    double x, theta;
  } probes[] = {{-2.0, -0.8}, {-0.7, 0.635}, {0.4, 1.2}, {1.1, 0.31}, {2.0, -0.15}};
  for (ModelKind kind : {ModelKind::x_independent, ModelKind::ou, ModelKind::cubic}) {
    const DriftModel m = DriftModel::make(kind, kind == ModelKind::x_independent ? 2.3 : 0.335);
    for (const auto& p : probes) {
      const double theta = m.theta_star + p.theta;
      const GPartials chain = g_partials(m, p.x, theta);
      const FdPartials fd = fd_partials(m, p.x, theta);
      check_close(chain.g_theta, fd.g_theta, "g_theta");
      check_close(chain.g_thetatheta, fd.g_thetatheta, "g_thetatheta");
      check_close(chain.g_thetathetatheta, fd.g_thetathetatheta, "g_thetathetatheta");
      check_close(chain.g_xtheta, fd.g_xtheta, "g_xtheta");
      check_close(chain.g_thetathetax, fd.g_thetathetax, "g_thetathetax");
      check_close(chain.g_xxtheta, fd.g_xxtheta, "g_xxtheta");
    }
  }
}

TEST_CASE("g_theta vanishes at theta* for every builtin model") {
  for (ModelKind kind : {ModelKind::x_independent, ModelKind::ou, ModelKind::cubic}) {
    const DriftModel m = DriftModel::make(kind, kind == ModelKind::x_independent ? 2.3 : 0.031);
    for (double x = -3.0; x <= 3.0; x += 0.5)
      CHECK(g_partials(m, x, m.theta_star).g_theta == 0.0);
  }
}

TEST_CASE("g partial overflow is reported with the offending partial") {
  const DriftModel cubic = DriftModel::make(ModelKind::cubic, 0.035);
  CHECK_THROWS_WITH_AS(g_partials(cubic, 1e80, 0.1), doctest::Contains("g_theta"),
                       NumericalError);
  CHECK_THROWS_WITH_AS(g_partials(cubic, 1e80, 0.1), doctest::Contains("non-finite"),
                       NumericalError);
}

TEST_CASE("invariant density: Gaussian cases") {
  const DriftModel ou = DriftModel::make(ModelKind::ou, 0.031);
  const DensityTable d = invariant_density(ou);
  // Stationary variance 1/(2 c*).
  CHECK(d.moment(2) == doctest::Approx(1.0 / 0.062).epsilon(1e-8));
  CHECK(std::abs(d.trapezoid(d.m) - 1.0) < 1e-10);
  CHECK(d.tail_mass < 1e-12);

  const DriftModel unit = DriftModel::make(ModelKind::ou, 1.0);
  CHECK(invariant_density(unit).moment(2) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("invariant density: cubic quartic tails") {
  const double c_star = 0.035;
  const DriftModel cubic = DriftModel::make(ModelKind::cubic, c_star);
  const DensityTable d = invariant_density(cubic);
  CHECK(std::abs(d.trapezoid(d.m) - 1.0) < 1e-10);
  // m(x) proportional to exp(-(c*/2) x^4): check pointwise ratios.
  const std::size_t c = d.x.size() / 2;
  const std::size_t i = c + static_cast<std::size_t>(1.0 / d.dx);
  const std::size_t j = c + static_cast<std::size_t>(2.0 / d.dx);
  const double expected =
      std::exp(-0.5 * c_star * (std::pow(d.x[j], 4) - std::pow(d.x[i], 4)));
  CHECK(d.m[j] / d.m[i] == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("invariant density: renormalization is idempotent") {
  const DensityTable d = invariant_density(DriftModel::make(ModelKind::ou, 0.5));
  std::vector<double> again = d.m;
  const double z = d.trapezoid(again);
  for (auto& v : again) v /= z;
  for (std::size_t i = 0; i < again.size(); i += 1000) CHECK(again[i] == doctest::Approx(d.m[i]));
}

TEST_CASE("invariant density: non-integrable and too-small domains are errors") {
  const DriftModel flat = DriftModel::make(ModelKind::x_independent, 2.3);
  CHECK_THROWS_AS(invariant_density(flat), NumericalError);

  const DriftModel ou = DriftModel::make(ModelKind::ou, 0.031);
  QuadratureGrid tiny;
  tiny.half_width = 2.0;  // ~half a stationary sd: tails nowhere near decayed
  CHECK_THROWS_WITH_AS(invariant_density(ou, tiny), doctest::Contains("domain too small"),
                       NumericalError);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(DriftModel::make(ModelKind::ou, 0.5, -1.0), ConfigError);
  CHECK_THROWS_AS(DriftModel::make(ModelKind::cubic, -0.1), ConfigError);

  // The cubic drift has f*_x(0) = 0: reported as a warning, not a failure.
  const auto cubic_warnings = validate_model(DriftModel::make(ModelKind::cubic, 0.035));
  CHECK(!cubic_warnings.empty());
  CHECK(cubic_warnings.front().find("f_star_x") != std::string::npos);
  CHECK(validate_model(DriftModel::make(ModelKind::ou, 0.031)).empty());
}

TEST_CASE("model kind parsing") {
  CHECK(parse_model_kind("ou") == ModelKind::ou);
  CHECK(parse_model_kind("x_independent") == ModelKind::x_independent);
  CHECK_THROWS_AS(parse_model_kind("pinned"), ConfigError);
}

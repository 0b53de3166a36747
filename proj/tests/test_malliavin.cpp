#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sgdct/errors.hpp"
#include "sgdct/malliavin.hpp"

using namespace sgdct;

namespace {

SimConfig ou_config(double t_end, double dt) {
  SimConfig cfg;
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.alpha = {0.045, 1.0};
  cfg.n_paths = 1;
  cfg.master_seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("D_r x is the exact exponential for the OU model") {
  const double c_star = 0.8;
  const DriftModel ou = DriftModel::make(ModelKind::ou, c_star);
  const SimConfig cfg = ou_config(12.0, 0.01);
  const FullPath path = simulate_full_path(ou, cfg, 0);
  const double r = 1.0;
  const FirstOrderTrajectory first = propagate_first(path, ou, cfg, r);
  for (std::size_t j = 0; j < first.dx.size(); j += 13) {
    const double t = r + cfg.dt * static_cast<double>(j);
    CHECK(std::abs(first.dx[j] - std::exp(-c_star * (t - r))) <= 1e-12);
    CHECK(first.dx[j] > 0.0);
  }
}

TEST_CASE("D_r theta matches the closed form for the x-independent model") {
  const DriftModel flat = DriftModel::make(ModelKind::x_independent, 2.3);

  SUBCASE("c0 = 1 convention") {
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 100.0;
    cfg.alpha = {1.0, 1.0};
    cfg.master_seed = 3;
    const FullPath path = simulate_full_path(flat, cfg, 0);
    const double r = 5.0;
    const FirstOrderTrajectory first = propagate_first(path, flat, cfg, r);
    for (std::size_t j = 0; j < first.dtheta.size(); j += 997) {
      const double t = r + cfg.dt * static_cast<double>(j);
      const double exact = cfg.alpha(r) * std::pow((1.0 + r) / (1.0 + t), cfg.alpha.c_alpha);
      CHECK(first.dtheta[j] == doctest::Approx(exact).epsilon(0.01));
    }
  }

  SUBCASE("c0 = 0, t >= 1 convention: alpha_r (r/t)^{c_alpha}") {
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.t_start = 1.0;
    cfg.t_end = 1000.0;
    cfg.alpha = {1.0, 0.0};
    cfg.master_seed = 3;
    const FullPath path = simulate_full_path(flat, cfg, 0);
    const double r = 100.0;
    const FirstOrderTrajectory first = propagate_first(path, flat, cfg, r);
    const std::size_t j_end = first.dtheta.size() - 1;
    // alpha_r (r/t)^{c_alpha} = (1/100)(100/1000) = 1e-3 at t = 1000.
    CHECK(first.dtheta[j_end] == doctest::Approx(1e-3).epsilon(0.01));
  }
}

TEST_CASE("anchor consistency: initial values are taken exactly") {
  const DriftModel ou = DriftModel::make(ModelKind::ou, 0.5);
  SimConfig cfg = ou_config(20.0, 0.1);
  cfg.alpha = {0.3, 1.0};
  const FullPath path = simulate_full_path(ou, cfg, 4);
  const double r = 2.0;
  const FirstOrderTrajectory first = propagate_first(path, ou, cfg, r);
  const std::size_t k_r = step_index(cfg, r);
  CHECK(first.dx[0] == 1.0);
  CHECK(first.dtheta[0] == cfg.alpha(r) * ou.f_theta(path.x[k_r], path.theta[k_r]));
}

TEST_CASE("second order: zero sources give identically zero derivatives") {
  SUBCASE("OU: f*_xx = 0 so D2x = 0") {
    const DriftModel ou = DriftModel::make(ModelKind::ou, 0.5);
    const SimConfig cfg = ou_config(20.0, 0.05);
    const FullPath path = simulate_full_path(ou, cfg, 1);
    const FirstOrderTrajectory f1 = propagate_first(path, ou, cfg, 2.0);
    const FirstOrderTrajectory f2 = propagate_first(path, ou, cfg, 4.0);
    const SecondOrderTrajectory second = propagate_second(path, f1, f2, ou, cfg);
    for (double v : second.d2x) CHECK(v == 0.0);
  }
  SUBCASE("x-independent: gamma and both sources vanish so D2theta = 0") {
    const DriftModel flat = DriftModel::make(ModelKind::x_independent, 2.3);
    SimConfig cfg = ou_config(20.0, 0.05);
    cfg.alpha = {1.0, 1.0};
    const FullPath path = simulate_full_path(flat, cfg, 1);
    const FirstOrderTrajectory f1 = propagate_first(path, flat, cfg, 2.0);
    const FirstOrderTrajectory f2 = propagate_first(path, flat, cfg, 4.0);
    const SecondOrderTrajectory second = propagate_second(path, f1, f2, flat, cfg);
    for (double v : second.d2theta) CHECK(v == 0.0);
  }
}

TEST_CASE("second order: initial value gamma against a hand oracle") {
  const DriftModel cubic = DriftModel::make(ModelKind::cubic, 0.035);
  SimConfig cfg;
  cfg.dt = 0.05;
  cfg.t_end = 30.0;
  cfg.alpha = {0.01, 1.0};
  cfg.master_seed = 11;
  const FullPath path = simulate_full_path(cubic, cfg, 0);

  SUBCASE("coincident anchors r1 = r2 = r") {
    const double r = 2.0;
    const FirstOrderTrajectory f = propagate_first(path, cubic, cfg, r);
    const SecondOrderTrajectory second = propagate_second(path, f, f, cubic, cfg);
    const std::size_t k_r = step_index(cfg, r);
    // gamma = 2 alpha_r [f_xtheta D_r x_r + f_thetatheta D_r theta_r], and for
    // the cubic model f_xtheta = -3 x^2, f_thetatheta = 0, D_r x_r = 1.
    const double expected = 2.0 * cfg.alpha(r) * (-3.0 * path.x[k_r] * path.x[k_r]);
    CHECK(second.d2theta[0] == doctest::Approx(expected).epsilon(1e-14));
  }

  SUBCASE("distinct anchors: only the later-anchor terms survive") {
    const double r1 = 2.0, r2 = 5.0;
    const FirstOrderTrajectory f1 = propagate_first(path, cubic, cfg, r1);
    const FirstOrderTrajectory f2 = propagate_first(path, cubic, cfg, r2);
    const SecondOrderTrajectory second = propagate_second(path, f1, f2, cubic, cfg);
    const std::size_t k2 = step_index(cfg, r2);
    const double expected =
        cfg.alpha(r2) * (-3.0 * path.x[k2] * path.x[k2]) * f1.dx_at(k2);
    CHECK(second.d2theta[0] == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("second order is symmetric in the anchors, bit for bit") {
  const DriftModel cubic = DriftModel::make(ModelKind::cubic, 0.035);
  SimConfig cfg;
  cfg.dt = 0.05;
  cfg.t_end = 30.0;
  cfg.alpha = {0.01, 1.0};
  cfg.master_seed = 5;
  const FullPath path = simulate_full_path(cubic, cfg, 0);
  const FirstOrderTrajectory f1 = propagate_first(path, cubic, cfg, 2.0);
  const FirstOrderTrajectory f2 = propagate_first(path, cubic, cfg, 6.0);
  const SecondOrderTrajectory a = propagate_second(path, f1, f2, cubic, cfg);
  const SecondOrderTrajectory b = propagate_second(path, f2, f1, cubic, cfg);
  CHECK(a.r1 == b.r1);
  CHECK(a.r2 == b.r2);
  REQUIRE(a.d2theta.size() == b.d2theta.size());
  for (std::size_t j = 0; j < a.d2theta.size(); ++j) {
    CHECK(a.d2theta[j] == b.d2theta[j]);
    CHECK(a.d2x[j] == b.d2x[j]);
  }
}

TEST_CASE("anchors must sit on the grid and past t = 1") {
  const DriftModel ou = DriftModel::make(ModelKind::ou, 0.5);
  const SimConfig cfg = ou_config(20.0, 0.1);
  const FullPath path = simulate_full_path(ou, cfg, 0);
  CHECK_THROWS_AS(propagate_first(path, ou, cfg, 2.0313), ConfigError);
  CHECK_THROWS_AS(propagate_first(path, ou, cfg, 0.5), ConfigError);
}

TEST_CASE("moment scaling: x-independent closed form has slope -2 c_alpha") {
  const DriftModel flat = DriftModel::make(ModelKind::x_independent, 2.3);
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.t_start = 1.0;
  cfg.t_end = 512.0;
  cfg.alpha = {1.0, 0.0};
  cfg.n_paths = 4;  // the derivative is deterministic for this model
  MomentScalingRequest req;
  req.order = 1;
  req.p = 1;
  req.r1 = 2.0;
  req.sample_times = {8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0};
  const MomentSeries series = moment_scaling(flat, cfg, req, /*c_gbar=*/1.0);
  REQUIRE(series.fitted_slope.has_value());
  CHECK(series.predicted_exponent == doctest::Approx(-2.0));
  CHECK(*series.fitted_slope == doctest::Approx(-2.0).epsilon(1e-4));
  for (double se : series.stderr_) CHECK(se <= 1e-12);  // all paths identical
}

TEST_CASE("moment scaling: degenerate fit input keeps the moment table") {
  const DriftModel flat = DriftModel::make(ModelKind::x_independent, 2.3);
  SimConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 50.0;
  cfg.alpha = {1.0, 1.0};
  cfg.n_paths = 2;
  MomentScalingRequest req;
  req.order = 1;
  req.p = 1;
  req.r1 = 10.0;
  req.sample_times = {50.0};  // single point: no fit possible
  const MomentSeries series = moment_scaling(flat, cfg, req, 1.0);
  CHECK(!series.fitted_slope.has_value());
  CHECK(!series.fit_error.empty());
  REQUIRE(series.moment.size() == 1);
  CHECK(series.moment[0] > 0.0);
}

TEST_CASE("default anchors span t_end/64 .. t_end/4 on the grid") {
  SimConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 7000.0;
  const auto anchors = default_anchors(cfg);
  REQUIRE(anchors.size() == 3);
  CHECK(anchors[0] == doctest::Approx(7000.0 / 64.0).epsilon(1e-3));
  CHECK(anchors[1] == doctest::Approx(7000.0 / 16.0));
  CHECK(anchors[2] == doctest::Approx(7000.0 / 4.0));
}

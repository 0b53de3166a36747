#include "sgdct/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "sgdct/csv.hpp"
#include "sgdct/errors.hpp"
#include "sgdct/malliavin.hpp"
#include "sgdct/rng.hpp"

namespace sgdct {

namespace {

constexpr double kFlaggedFraction = 0.01;

std::string format_ca(double c_alpha) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", c_alpha);
  return buf;
}

std::vector<std::pair<std::string, std::string>> base_meta(const LabConfig& cfg,
                                                           std::size_t flagged) {
  return {{"config", resolved_config_line(cfg)},
          {"master_seed", std::to_string(cfg.seed)},
          {"flagged_paths", std::to_string(flagged)}};
}

}  // namespace

const std::vector<ExperimentPreset>& presets() {
  static const std::vector<ExperimentPreset> all = [] {
    std::vector<ExperimentPreset> p;
    // X-independent dynamics: no data process, explicit limiting variance.
    ExperimentPreset e1;
    e1.name = "example1";
    e1.model = ModelKind::x_independent;
    e1.theta_star = 2.3;
    e1.theta0 = 2.3;
    e1.c_alphas = {0.43, 0.72, 0.78, 1.0};
    e1.dt = 0.1;
    e1.t_end_w1 = 5000.0;
    e1.t_end_var = 5000.0;
    e1.n_paths = 1100;
    p.push_back(e1);
    // Ornstein-Uhlenbeck drift estimation.
    ExperimentPreset e2;
    e2.name = "example2_ou";
    e2.model = ModelKind::ou;
    e2.theta_star = 0.031;
    e2.theta0 = 0.031;
    e2.c_alphas = {0.045, 0.0496, 0.068};
    e2.dt = 0.1;
    e2.t_end_w1 = 7000.0;
    e2.t_end_var = 7000.0;
    e2.n_paths = 150;
    e2.extra_snapshots = {6500.0};
    p.push_back(e2);
    // Cubic drift. W1 runs use the long horizon, variance estimation the
    // short one (two separate figures in the source study).
    ExperimentPreset e3;
    e3.name = "example3_cubic";
    e3.model = ModelKind::cubic;
    e3.theta_star = 0.035;
    e3.theta0 = 0.035;
    e3.c_alphas = {0.0092, 0.011, 0.016};
    e3.dt = 0.1;
    e3.t_end_w1 = 10000.0;
    e3.t_end_var = 2000.0;
    e3.n_paths = 100;
    p.push_back(e3);
    return p;
  }();
  return all;
}

const ExperimentPreset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw ConfigError("unknown preset \"" + name +
                    "\" (expected example1 | example2_ou | example3_cubic)");
}

LabConfig lab_config_from_preset(const ExperimentPreset& preset, double c_alpha,
                                 bool variance_run) {
  LabConfig cfg;
  cfg.model_name = std::string(model_kind_name(preset.model));
  cfg.theta_star = preset.theta_star;
  cfg.sigma = preset.sigma;
  cfg.theta0 = preset.theta0;
  cfg.c_alpha = c_alpha;
  cfg.c0 = preset.c0;
  cfg.dt = preset.dt;
  cfg.t_end = variance_run ? preset.t_end_var : preset.t_end_w1;
  cfg.n_paths = preset.n_paths;
  cfg.seed = preset.seed;
  std::ostringstream schedule;
  schedule << "log:48:" << std::max(10.0 * cfg.dt, cfg.t_end / 1000.0) << ":" << cfg.t_end;
  cfg.snapshot_schedule = schedule.str();
  if (!variance_run) {
    for (double extra : preset.extra_snapshots) {
      if (extra < cfg.t_end) {
        cfg.snapshot_list = expand_snapshots(cfg.snapshot_schedule, {}, cfg.dt, cfg.t_start, cfg.t_end);
        cfg.snapshot_list.push_back(extra);
        std::sort(cfg.snapshot_list.begin(), cfg.snapshot_list.end());
        cfg.snapshot_list.erase(std::unique(cfg.snapshot_list.begin(), cfg.snapshot_list.end()),
                                cfg.snapshot_list.end());
        cfg.snapshot_schedule.clear();
      }
    }
  }
  return cfg;
}

namespace {

struct VarianceSeriesResult {
  std::vector<double> t;
  std::vector<double> t_var;
  double t_var_final = 0.0;
};

VarianceSeriesResult write_variance_series(const LabConfig& cfg, const PathEnsemble& ens,
                                           const std::filesystem::path& path) {
  auto meta = base_meta(cfg, ens.flagged_count);
  CsvFile csv(path, "sgdct.variance_series", meta, "t,mean_theta,var_theta,t_var,stderr");
  VarianceSeriesResult result;
  for (double t : ens.snapshot_times) {
    const FluctuationStats st = fluctuation_stats(ens, cfg.theta_star, t);
    // Normal-approximation standard error of t * (sample variance).
    const double se = st.t_var * std::sqrt(2.0 / static_cast<double>(st.n_used - 1));
    csv.row({CsvFile::num(t), CsvFile::num(st.mean), CsvFile::num(st.var), CsvFile::num(st.t_var),
             CsvFile::num(se)});
    result.t.push_back(t);
    result.t_var.push_back(st.t_var);
    result.t_var_final = st.t_var;
  }
  return result;
}

}  // namespace

BundleArtifacts run_bundle(const LabConfig& cfg, double t_end_var,
                           const std::filesystem::path& out_dir,
                           std::optional<double> sigma_bar_override, int workers) {
  const DriftModel model = model_from(cfg);

  std::optional<DensityTable> density;
  if (model.has_x_process)
    density = invariant_density(model, QuadratureGrid{cfg.quad_half_width, cfg.quad_n_points});
  const VarianceReport report =
      limiting_variance(model, density ? &*density : nullptr, cfg.theta_star, cfg.c_alpha);

  // Gaussian target for W1. In the divergent regime there is no limiting
  // variance; the curves are still informative against a fixed N(0,1) target
  // (they stop decaying), so that is the fallback.
  double target_var = 1.0;
  if (sigma_bar_override)
    target_var = *sigma_bar_override;
  else if (report.sigma_bar)
    target_var = *report.sigma_bar;

  SimConfig sim = sim_config_from(cfg);
  sim.workers = workers;
  const PathEnsemble ens = run_ensemble(model, sim);

  BundleArtifacts art;
  art.n_paths = static_cast<std::size_t>(cfg.n_paths);
  art.flagged = ens.flagged_count;

  // One fixed comparison sample per experiment, reused across t, so the
  // paired W1 curve is smooth in t.
  const std::vector<double> z =
      gaussian_sample(static_cast<std::size_t>(cfg.n_paths),
                      substream_seed(cfg.seed, kComparisonSampleStream));
  const double sd = std::sqrt(target_var);

  {
    auto meta = base_meta(cfg, ens.flagged_count);
    meta.emplace_back("w1_target_variance", CsvFile::num(target_var));
    meta.emplace_back("c_gbar", CsvFile::num(report.c_gbar));
    CsvFile csv(out_dir / "w1.csv", "sgdct.w1", meta,
                "t,w1_paired,w1_quantile,log_w1_over_log_t,n_paths");
    for (double t : ens.snapshot_times) {
      const FluctuationStats st = fluctuation_stats(ens, cfg.theta_star, t);
      std::vector<double> target(st.n_used);
      for (std::size_t i = 0; i < st.n_used; ++i) target[i] = sd * z[i];
      const double w1p = w1_empirical(st.f_sample, target);
      const double w1q = w1_vs_gaussian(st.f_sample, 0.0, target_var, W1Mode::quantile);
      const double log_t = std::log(t);
      const double ratio = log_t != 0.0 ? std::log(w1q) / log_t
                                        : std::numeric_limits<double>::quiet_NaN();
      csv.row({CsvFile::num(t), CsvFile::num(w1p), CsvFile::num(w1q), CsvFile::num(ratio),
               CsvFile::num(st.n_used)});
      art.w1_t.push_back(t);
      art.w1_paired.push_back(w1p);
      art.w1_quantile.push_back(w1q);
    }
  }

  VarianceSeriesResult var_series;
  if (t_end_var == cfg.t_end) {
    var_series = write_variance_series(cfg, ens, out_dir / "variance_series.csv");
  } else {
    LabConfig var_cfg = cfg;
    var_cfg.t_end = t_end_var;
    var_cfg.snapshot_schedule.clear();
    var_cfg.snapshot_list.clear();
    SimConfig var_sim = sim_config_from(var_cfg);
    var_sim.workers = workers;
    const PathEnsemble var_ens = run_ensemble(model, var_sim);
    var_series = write_variance_series(var_cfg, var_ens, out_dir / "variance_series.csv");
    art.flagged = std::max(art.flagged, var_ens.flagged_count);
  }
  art.var_t = var_series.t;
  art.t_var = var_series.t_var;

  SummaryRow& row = art.row;
  row.preset = "custom";
  row.c_alpha = cfg.c_alpha;
  row.c_gbar = report.c_gbar;
  row.c_gbar_c_alpha = report.c_gbar * cfg.c_alpha;
  row.sigma_bar = report.sigma_bar;
  row.t_var_final = var_series.t_var_final;
  const double t_final = art.w1_t.back();
  row.log_w1_over_log_t_final = std::log(art.w1_quantile.back()) / std::log(t_final);
  row.regime = report.regime == VarianceRegime::convergent ? "convergent" : "divergent";

  if (static_cast<double>(art.flagged) > kFlaggedFraction * cfg.n_paths) {
    std::ostringstream msg;
    msg << art.flagged << " of " << cfg.n_paths
        << " paths went non-finite (limit 1%); outputs were written but statistics are suspect";
    throw NumericalError(msg.str());
  }
  return art;
}

namespace {

void write_summary(const std::filesystem::path& path, const LabConfig& reference_cfg,
                   const std::vector<SummaryRow>& rows, std::size_t flagged) {
  CsvFile csv(path, "sgdct.summary", base_meta(reference_cfg, flagged),
              "preset,c_alpha,c_gbar,c_gbar_c_alpha,sigma_bar_closed_form,t_var_final,"
              "log_w1_over_log_t_final,regime");
  for (const auto& r : rows) {
    csv.row({r.preset, CsvFile::num(r.c_alpha), CsvFile::num(r.c_gbar),
             CsvFile::num(r.c_gbar_c_alpha),
             r.sigma_bar ? CsvFile::num(*r.sigma_bar) : std::string(),
             CsvFile::num(r.t_var_final), CsvFile::num(r.log_w1_over_log_t_final), r.regime});
  }
}

void apply_overrides(LabConfig& cfg, const RunOverrides& overrides) {
  if (overrides.n_paths) cfg.n_paths = *overrides.n_paths;
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.dt) cfg.dt = *overrides.dt;
  if (overrides.t_end) {
    cfg.t_end = *overrides.t_end;
    cfg.snapshot_list.clear();
    if (!cfg.snapshot_schedule.empty()) {
      std::ostringstream schedule;
      schedule << "log:48:" << std::max(10.0 * cfg.dt, cfg.t_end / 1000.0) << ":" << cfg.t_end;
      cfg.snapshot_schedule = schedule.str();
    }
  }
}

}  // namespace

std::vector<SummaryRow> run_preset(const std::string& name, const RunOverrides& overrides,
                                   const std::filesystem::path& out_dir,
                                   std::vector<BundleArtifacts>* artifacts) {
  const ExperimentPreset& preset = find_preset(name);
  std::vector<SummaryRow> rows;
  std::size_t flagged = 0;
  LabConfig reference;
  std::string pending_numerical_error;
  for (double c_alpha : preset.c_alphas) {
    LabConfig cfg = lab_config_from_preset(preset, c_alpha, false);
    apply_overrides(cfg, overrides);
    double t_end_var = overrides.t_end ? cfg.t_end
                                       : std::min(preset.t_end_var, cfg.t_end);
    reference = cfg;
    try {
      BundleArtifacts art = run_bundle(cfg, t_end_var, out_dir / ("ca_" + format_ca(c_alpha)),
                                       overrides.sigma_bar_override, overrides.workers);
      art.row.preset = preset.name;
      flagged += art.flagged;
      rows.push_back(art.row);
      if (artifacts) artifacts->push_back(std::move(art));
    } catch (const NumericalError& e) {
      pending_numerical_error = e.what();
    }
  }
  write_summary(out_dir / "summary.csv", reference, rows, flagged);
  if (!pending_numerical_error.empty()) throw NumericalError(pending_numerical_error);
  return rows;
}

std::vector<SummaryRow> run_custom(const LabConfig& cfg_in, const RunOverrides& overrides,
                                   const std::filesystem::path& out_dir,
                                   std::vector<BundleArtifacts>* artifacts) {
  LabConfig cfg = cfg_in;
  apply_overrides(cfg, overrides);
  BundleArtifacts art =
      run_bundle(cfg, cfg.t_end, out_dir, overrides.sigma_bar_override, overrides.workers);
  std::vector<SummaryRow> rows = {art.row};
  write_summary(out_dir / "summary.csv", cfg, rows, art.flagged);
  if (artifacts) artifacts->push_back(std::move(art));
  return rows;
}

namespace {

std::string run_simulate(const LabConfig& cfg_in, const RunOverrides& overrides,
                         const std::filesystem::path& out_dir) {
  LabConfig cfg = cfg_in;
  apply_overrides(cfg, overrides);
  const DriftModel model = model_from(cfg);
  SimConfig sim = sim_config_from(cfg);
  sim.workers = overrides.workers;
  const PathEnsemble ens = run_ensemble(model, sim);
  CsvFile csv(out_dir / "snapshots.csv", "sgdct.snapshots", base_meta(cfg, ens.flagged_count),
              "t,path_index,x,theta");
  for (std::size_t s = 0; s < ens.snapshot_times.size(); ++s) {
    for (int i = 0; i < cfg.n_paths; ++i) {
      csv.row({CsvFile::num(ens.snapshot_times[s]), CsvFile::num(i),
               CsvFile::num(ens.x[s][static_cast<std::size_t>(i)]),
               CsvFile::num(ens.theta[s][static_cast<std::size_t>(i)])});
    }
  }
  std::ostringstream summary;
  summary << "snapshots.csv: " << ens.snapshot_times.size() << " snapshots x " << cfg.n_paths
          << " paths, " << ens.flagged_count << " flagged";
  if (static_cast<double>(ens.flagged_count) > kFlaggedFraction * cfg.n_paths)
    throw NumericalError(std::to_string(ens.flagged_count) + " of " +
                         std::to_string(cfg.n_paths) + " paths went non-finite (limit 1%)");
  return summary.str();
}

std::string variance_row_text(const LabConfig& cfg, const VarianceReport& report) {
  std::ostringstream out;
  out << cfg.model_name << "," << CsvFile::num(cfg.theta_star) << "," << CsvFile::num(cfg.c_alpha)
      << "," << CsvFile::num(report.c_gbar) << "," << CsvFile::num(report.h_bar) << ","
      << (report.sigma_bar ? CsvFile::num(*report.sigma_bar) : std::string()) << ","
      << (report.regime == VarianceRegime::convergent ? "convergent" : "divergent");
  return out.str();
}

std::string run_variance(const LabConfig& cfg, const std::filesystem::path& out_dir,
                         bool write_file) {
  const DriftModel model = model_from(cfg);
  std::optional<DensityTable> density;
  if (model.has_x_process)
    density = invariant_density(model, QuadratureGrid{cfg.quad_half_width, cfg.quad_n_points});
  const VarianceReport report =
      limiting_variance(model, density ? &*density : nullptr, cfg.theta_star, cfg.c_alpha);
  const std::string row = variance_row_text(cfg, report);
  if (write_file) {
    CsvFile csv(out_dir / "variance.csv", "sgdct.variance", base_meta(cfg, 0),
                "model,theta_star,c_alpha,c_gbar,h_bar,sigma_bar,regime");
    csv.raw_row(row);
  }
  return "model,theta_star,c_alpha,c_gbar,h_bar,sigma_bar,regime\n" + row;
}

std::string run_poisson(const LabConfig& cfg, const RunOverrides& overrides,
                        const std::filesystem::path& out_dir) {
  const DriftModel model = model_from(cfg);
  if (!model.has_x_process)
    throw ConfigError("the poisson command needs a model with an x process");
  const DensityTable density =
      invariant_density(model, QuadratureGrid{cfg.quad_half_width, cfg.quad_n_points});
  const double theta = overrides.poisson_theta.value_or(cfg.theta_star);
  const double gbar_theta = gbar(model, &density, theta, 1);
  std::vector<double> H(density.x.size());
  for (std::size_t i = 0; i < H.size(); ++i)
    H[i] = gbar_theta - g_partials(model, density.x[i], theta).g_theta;
  const PoissonSolution sol = solve_poisson(H, model, density);

  auto meta = base_meta(cfg, 0);
  meta.emplace_back("theta", CsvFile::num(theta));
  meta.emplace_back("source_centering_residual", CsvFile::num(sol.source_centering_residual));
  meta.emplace_back("centering_residual", CsvFile::num(sol.centering_residual));
  meta.emplace_back("vx_mismatch", CsvFile::num(sol.vx_mismatch));
  meta.emplace_back("tail_mass", CsvFile::num(density.tail_mass));
  CsvFile csv(out_dir / "poisson.csv", "sgdct.poisson", meta, "x,m,H,v,v_x");
  for (std::size_t i = 0; i < density.x.size(); ++i) {
    csv.row({CsvFile::num(density.x[i]), CsvFile::num(density.m[i]), CsvFile::num(H[i]),
             CsvFile::num(sol.v[i]), CsvFile::num(sol.v_x[i])});
  }
  std::ostringstream summary;
  summary << "poisson.csv: " << density.x.size() << " grid points, centering residual "
          << sol.centering_residual << ", v_x mismatch " << sol.vx_mismatch;
  return summary.str();
}

std::string run_malliavin(const LabConfig& cfg_in, const RunOverrides& overrides,
                          const std::filesystem::path& out_dir) {
  LabConfig cfg = cfg_in;
  apply_overrides(cfg, overrides);
  const DriftModel model = model_from(cfg);
  SimConfig sim = sim_config_from(cfg);
  sim.workers = overrides.workers;
  validate_config(model, sim);

  std::optional<DensityTable> density;
  if (model.has_x_process)
    density = invariant_density(model, QuadratureGrid{cfg.quad_half_width, cfg.quad_n_points});
  const double c_gbar = gbar(model, density ? &*density : nullptr, cfg.theta_star, 2);

  std::vector<double> anchors = cfg.malliavin_anchors;
  if (anchors.empty()) anchors = default_anchors(sim);

  auto sample_grid = [&](double r_hi) {
    std::vector<double> times;
    const double lo = std::min(std::max(1.5 * r_hi, r_hi + 10.0 * sim.dt), sim.t_end);
    const double hi = sim.t_end;
    const int n = 12;
    const double ratio = std::pow(hi / lo, 1.0 / (n - 1));
    double t = lo;
    for (int i = 0; i < n; ++i, t *= ratio) {
      const double snapped =
          sim.t_start + std::round((t - sim.t_start) / sim.dt) * sim.dt;
      if (times.empty() || snapped > times.back()) times.push_back(snapped);
    }
    return times;
  };

  auto meta = base_meta(cfg, 0);
  meta.emplace_back("c_gbar", CsvFile::num(c_gbar));
  CsvFile csv(out_dir / "malliavin.csv", "sgdct.malliavin", meta,
              "order,p,r1,r2,t,moment,stderr,predicted_exponent,fitted_slope");
  std::ostringstream summary;
  summary << "malliavin.csv:";

  auto emit = [&](const MomentSeries& series) {
    for (std::size_t j = 0; j < series.t.size(); ++j) {
      csv.row({CsvFile::num(series.order), CsvFile::num(series.p), CsvFile::num(series.r1),
               CsvFile::num(series.r2), CsvFile::num(series.t[j]), CsvFile::num(series.moment[j]),
               CsvFile::num(series.stderr_[j]), CsvFile::num(series.predicted_exponent),
               series.fitted_slope ? CsvFile::num(*series.fitted_slope) : std::string()});
    }
    summary << " [order " << series.order << " r1=" << series.r1 << " r2=" << series.r2
            << " slope="
            << (series.fitted_slope ? CsvFile::num(*series.fitted_slope) : "n/a")
            << " predicted=" << CsvFile::num(series.predicted_exponent) << "]";
  };

  for (double r : anchors) {
    MomentScalingRequest req;
    req.order = 1;
    req.p = cfg.malliavin_p;
    req.r1 = r;
    req.sample_times = sample_grid(r);
    emit(moment_scaling(model, sim, req, c_gbar));
  }
  // Second order on (r, r) and (r, 2r) pairs.
  for (double r : anchors) {
    for (double r2 : {r, 2.0 * r}) {
      const double snapped = sim.t_start + std::round((r2 - sim.t_start) / sim.dt) * sim.dt;
      if (snapped >= sim.t_end) continue;
      MomentScalingRequest req;
      req.order = 2;
      req.p = cfg.malliavin_p;
      req.r1 = r;
      req.r2 = snapped;
      req.sample_times = sample_grid(std::max(r, snapped));
      emit(moment_scaling(model, sim, req, c_gbar));
    }
  }
  return summary.str();
}

}  // namespace

std::string run_command(const std::string& command, const LabConfig& cfg,
                        const RunOverrides& overrides, const std::filesystem::path& out_dir) {
  if (command == "simulate") return run_simulate(cfg, overrides, out_dir);
  if (command == "variance") {
    LabConfig c = cfg;
    apply_overrides(c, overrides);
    return run_variance(c, out_dir, !out_dir.empty());
  }
  if (command == "poisson") return run_poisson(cfg, overrides, out_dir);
  if (command == "malliavin") return run_malliavin(cfg, overrides, out_dir);
  if (command == "custom" || command == "rates") {
    std::vector<BundleArtifacts> artifacts;
    const auto rows = run_custom(cfg, overrides, out_dir, &artifacts);
    std::ostringstream summary;
    const SummaryRow& r = rows.front();
    summary << "c_gbar=" << CsvFile::num(r.c_gbar) << " c_gbar_c_alpha="
            << CsvFile::num(r.c_gbar_c_alpha) << " sigma_bar="
            << (r.sigma_bar ? CsvFile::num(*r.sigma_bar) : "divergent")
            << " t_var_final=" << CsvFile::num(r.t_var_final)
            << " log_w1_over_log_t_final=" << CsvFile::num(r.log_w1_over_log_t_final)
            << " regime=" << r.regime;
    if (command == "rates" && !artifacts.empty()) {
      const BundleArtifacts& art = artifacts.front();
      const double t_lo = art.w1_t[art.w1_t.size() / 2];
      const double t_hi = art.w1_t.back();
      try {
        const RateFit fit = rate_fit(art.w1_t, art.w1_quantile, t_lo, t_hi);
        summary << " w1_slope[" << CsvFile::num(t_lo) << "," << CsvFile::num(t_hi)
                << "]=" << CsvFile::num(fit.slope);
      } catch (const NumericalError& e) {
        summary << " w1_slope=unavailable(" << e.what() << ")";
      }
    }
    return summary.str();
  }
  throw ConfigError("unknown command \"" + command + "\"");
}

}  // namespace sgdct

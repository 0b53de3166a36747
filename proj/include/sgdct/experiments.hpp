#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sgdct/config.hpp"
#include "sgdct/poisson.hpp"
#include "sgdct/stats.hpp"

namespace sgdct {

struct ExperimentPreset {
  std::string name;
  ModelKind model = ModelKind::ou;
  double theta_star = 0.0;
  double sigma = 1.0;
  // Presets start the optimizer at theta* to isolate the stationary
  // fluctuation law; with a distant theta0 the deterministic transient of
  // E[F_t] = sqrt(t)(theta0 - theta*)(c0/(c0+t))^{c_alpha} dominates the W1
  // curves until far beyond the preset horizons.
  double theta0 = 0.0;
  std::vector<double> c_alphas;
  double dt = 0.1;
  double t_end_w1 = 0.0;   // horizon of the W1 runs
  double t_end_var = 0.0;  // horizon of the variance-estimation runs
  int n_paths = 0;
  double c0 = 1.0;
  std::uint64_t seed = 12345;
  std::vector<double> extra_snapshots;  // appended to the schedule when <= t_end
};

const std::vector<ExperimentPreset>& presets();
const ExperimentPreset& find_preset(const std::string& name);

struct RunOverrides {
  std::optional<int> n_paths;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> t_end;
  int workers = 0;
  // Substitute Gaussian-target variance for W1 (comparison runs).
  std::optional<double> sigma_bar_override;
  std::optional<double> poisson_theta;  // `poisson` subcommand only
};

struct SummaryRow {
  std::string preset;
  double c_alpha = 0.0;
  double c_gbar = 0.0;
  double c_gbar_c_alpha = 0.0;
  std::optional<double> sigma_bar;  // closed form; absent in the divergent regime
  double t_var_final = 0.0;
  double log_w1_over_log_t_final = 0.0;
  std::string regime;
};

// Everything one (model, c_alpha) pipeline produces, kept in memory for
// callers that want the series without re-parsing the CSVs.
struct BundleArtifacts {
  SummaryRow row;
  std::vector<double> w1_t;
  std::vector<double> w1_paired;
  std::vector<double> w1_quantile;
  std::vector<double> var_t;
  std::vector<double> t_var;
  std::size_t flagged = 0;
  std::size_t n_paths = 0;
};

// Simulation -> statistics pipeline for one c_alpha; writes w1.csv and
// variance_series.csv under out_dir. When t_end_var != t_end_w1 two ensembles
// are run (mirroring the separate W1 and variance horizons of the cubic
// preset). Throws NumericalError when more than 1% of paths get flagged.
BundleArtifacts run_bundle(const LabConfig& cfg, double t_end_var,
                           const std::filesystem::path& out_dir,
                           std::optional<double> sigma_bar_override, int workers);

// Runs every c_alpha of a preset and writes <out>/ca_<value>/{w1.csv,
// variance_series.csv} plus <out>/summary.csv. Returns one summary row per
// c_alpha. Overrides may change n_paths, seed, dt, t_end only.
std::vector<SummaryRow> run_preset(const std::string& name, const RunOverrides& overrides,
                                   const std::filesystem::path& out_dir,
                                   std::vector<BundleArtifacts>* artifacts = nullptr);

// Same bundle shape for a user config (single c_alpha).
std::vector<SummaryRow> run_custom(const LabConfig& cfg, const RunOverrides& overrides,
                                   const std::filesystem::path& out_dir,
                                   std::vector<BundleArtifacts>* artifacts = nullptr);

// CLI-facing dispatch. Commands: simulate | variance | poisson | malliavin |
// rates | custom. Returns a short human-readable summary for stdout.
std::string run_command(const std::string& command, const LabConfig& cfg,
                        const RunOverrides& overrides, const std::filesystem::path& out_dir);

LabConfig lab_config_from_preset(const ExperimentPreset& preset, double c_alpha, bool variance_run);

}  // namespace sgdct

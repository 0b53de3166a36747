#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sgdct/models.hpp"
#include "sgdct/simulate.hpp"

namespace sgdct {

// Flat key-value config (TOML syntax). Root keys: model, theta_star, sigma,
// c_alpha, c0, t_start, dt, t_end, n_paths, seed, x0, theta0, snapshots.
// Nested tables: [quadrature] (L, n_points) and [malliavin] (anchors, p).
struct LabConfig {
  std::string model_name;
  double theta_star = 0.0;
  double sigma = 1.0;
  double c_alpha = 0.0;
  double c0 = 1.0;
  double t_start = 0.0;
  double dt = 0.0;
  double t_end = 0.0;
  int n_paths = 100;
  std::uint64_t seed = 12345;
  double x0 = 0.0;
  double theta0 = 0.0;
  // Either a schedule string "log:<n>:<t_min>:<t_max>" or an explicit list.
  std::string snapshot_schedule;
  std::vector<double> snapshot_list;

  double quad_half_width = 0.0;  // 0 = auto
  int quad_n_points = (1 << 14) + 1;

  std::vector<double> malliavin_anchors;  // empty = defaults
  int malliavin_p = 1;
};

LabConfig parse_config_file(const std::filesystem::path& path);
LabConfig parse_config_text(std::string_view text, const std::string& source_name);

// Expands "log:<n>:<t_min>:<t_max>" (or an explicit list) into snapshot times
// snapped to the dt grid; validates strict monotonicity after snapping.
std::vector<double> expand_snapshots(const std::string& schedule, const std::vector<double>& list,
                                     double dt, double t_start, double t_end);

DriftModel model_from(const LabConfig& cfg);
SimConfig sim_config_from(const LabConfig& cfg);

// "key=value key=value ..." of every numerically relevant setting, for CSV
// headers. Excludes performance knobs (worker count) by design: two runs that
// must be byte-identical may differ in those.
std::string resolved_config_line(const LabConfig& cfg);

}  // namespace sgdct

// Command-line front end. Links only the C API.
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "sgdct.h"

namespace {

struct SessionDeleter {
  void operator()(sgdct_session* s) const { sgdct_session_free(s); }
};
using SessionPtr = std::unique_ptr<sgdct_session, SessionDeleter>;

int fail(sgdct_status status) {
  std::fprintf(stderr, "error: %s\n", sgdct_last_error());
  return static_cast<int>(status);
}

struct CommonOpts {
  std::string config;
  std::string out = "out";
  std::string paths, seed, dt, t_end, workers, sigma_bar, theta;
};

int apply_overrides(sgdct_session* session, const CommonOpts& opts) {
  const std::pair<const char*, const std::string*> keys[] = {
      {"n_paths", &opts.paths},   {"seed", &opts.seed},
      {"dt", &opts.dt},           {"t_end", &opts.t_end},
      {"workers", &opts.workers}, {"sigma_bar", &opts.sigma_bar},
      {"poisson_theta", &opts.theta},
  };
  for (const auto& [key, value] : keys) {
    if (value->empty()) continue;
    if (const auto st = sgdct_session_set(session, key, value->c_str()); st != SGDCT_OK)
      return fail(st);
  }
  return 0;
}

int run(sgdct_session* session, const char* command, const std::string& out_dir) {
  char summary[4096];
  const auto st =
      sgdct_session_run(session, command, out_dir.empty() ? nullptr : out_dir.c_str(), summary,
                        sizeof(summary));
  if (st != SGDCT_OK) return fail(st);
  if (summary[0]) std::printf("%s\n", summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SGDCT fluctuation laboratory"};
  app.require_subcommand(1);

  std::string preset_name;
  CommonOpts preset_opts;
  auto* preset = app.add_subcommand("preset", "run a builtin experiment bundle");
  preset->add_option("name", preset_name, "example1 | example2_ou | example3_cubic")->required();
  preset->add_option("--paths", preset_opts.paths, "override n_paths");
  preset->add_option("--seed", preset_opts.seed, "override master seed");
  preset->add_option("--dt", preset_opts.dt, "override time step");
  preset->add_option("--t-end", preset_opts.t_end, "override horizon");
  preset->add_option("--out", preset_opts.out, "output directory");
  preset->add_option("--workers", preset_opts.workers, "worker threads (performance only)");
  preset->add_option("--sigma-bar", preset_opts.sigma_bar,
                     "substitute Gaussian-target variance for the W1 curves");

  const struct {
    const char* name;
    const char* help;
    bool needs_out;
  } config_commands[] = {
      {"simulate", "integrate the ensemble and write snapshots.csv", true},
      {"variance", "constants pipeline: c_gbar, h_bar, limiting variance", false},
      {"poisson", "solve the Poisson equation and write the grid CSV", true},
      {"malliavin", "propagate derivative moments and write malliavin.csv", true},
      {"rates", "simulation -> W1/variance series with rate fits", true},
      {"custom", "full bundle (w1.csv, variance_series.csv, summary.csv)", true},
  };
  CommonOpts opts[std::size(config_commands)];
  for (std::size_t i = 0; i < std::size(config_commands); ++i) {
    auto* cmd = app.add_subcommand(config_commands[i].name, config_commands[i].help);
    cmd->add_option("--config", opts[i].config, "TOML config file")->required();
    cmd->add_option("--out", opts[i].out, "output directory");
    cmd->add_option("--seed", opts[i].seed, "override master seed");
    cmd->add_option("--paths", opts[i].paths, "override n_paths");
    cmd->add_option("--workers", opts[i].workers, "worker threads (performance only)");
    cmd->add_option("--sigma-bar", opts[i].sigma_bar, "substitute Gaussian-target variance");
    if (std::string(config_commands[i].name) == "poisson")
      cmd->add_option("--theta", opts[i].theta, "evaluate the source at this theta");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // configuration error
  }

  if (preset->parsed()) {
    sgdct_session* raw = nullptr;
    if (const auto st = sgdct_session_from_preset(preset_name.c_str(), &raw); st != SGDCT_OK)
      return fail(st);
    SessionPtr session(raw);
    if (const int rc = apply_overrides(session.get(), preset_opts); rc != 0) return rc;
    return run(session.get(), "preset", preset_opts.out);
  }

  for (std::size_t i = 0; i < std::size(config_commands); ++i) {
    auto* cmd = app.get_subcommand(config_commands[i].name);
    if (!cmd->parsed()) continue;
    sgdct_session* raw = nullptr;
    if (const auto st = sgdct_session_from_file(opts[i].config.c_str(), &raw); st != SGDCT_OK)
      return fail(st);
    SessionPtr session(raw);
    if (const int rc = apply_overrides(session.get(), opts[i]); rc != 0) return rc;
    // Commands that can run without an output directory (variance) only get
    // one when --out was given explicitly.
    std::string out = opts[i].out;
    if (!config_commands[i].needs_out && cmd->count("--out") == 0) out.clear();
    return run(session.get(), config_commands[i].name, out);
  }
  return 1;
}

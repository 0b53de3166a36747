#include "sgdct.h"

#include <cstring>
#include <optional>
#include <string>

#include "sgdct/config.hpp"
#include "sgdct/csv.hpp"
#include "sgdct/errors.hpp"
#include "sgdct/experiments.hpp"
#include "sgdct/poisson.hpp"

namespace {

thread_local std::string g_last_error;

sgdct_status set_error(sgdct_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
sgdct_status guarded(Fn&& fn) {
  try {
    fn();
    return SGDCT_OK;
  } catch (const sgdct::ConfigError& e) {
    return set_error(SGDCT_ERR_CONFIG, e.what());
  } catch (const sgdct::NumericalError& e) {
    return set_error(SGDCT_ERR_NUMERICAL, e.what());
  } catch (const std::exception& e) {
    return set_error(SGDCT_ERR_NUMERICAL, e.what());
  }
}

}  // namespace

struct sgdct_session {
  bool is_preset = false;
  std::string preset_name;
  sgdct::LabConfig config;  // unused for preset sessions
  sgdct::RunOverrides overrides;
};

extern "C" {

const char* sgdct_version(void) { return "1.0.0"; }

const char* sgdct_schema_version(void) { return sgdct::kSchemaVersion; }

const char* sgdct_last_error(void) { return g_last_error.c_str(); }

sgdct_status sgdct_session_from_file(const char* config_path, sgdct_session** out) {
  if (!config_path || !out) return set_error(SGDCT_ERR_CONFIG, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto session = new sgdct_session();
    try {
      session->config = sgdct::parse_config_file(config_path);
    } catch (...) {
      delete session;
      throw;
    }
    *out = session;
  });
}

sgdct_status sgdct_session_from_preset(const char* preset_name, sgdct_session** out) {
  if (!preset_name || !out) return set_error(SGDCT_ERR_CONFIG, "null argument");
  *out = nullptr;
  return guarded([&] {
    sgdct::find_preset(preset_name);  // validates the name
    auto session = new sgdct_session();
    session->is_preset = true;
    session->preset_name = preset_name;
    *out = session;
  });
}

sgdct_status sgdct_session_set(sgdct_session* session, const char* key, const char* value) {
  if (!session || !key || !value) return set_error(SGDCT_ERR_CONFIG, "null argument");
  return guarded([&] {
    const std::string k = key;
    const std::string v = value;
    auto as_double = [&] {
      char* end = nullptr;
      const double d = std::strtod(v.c_str(), &end);
      if (end != v.c_str() + v.size())
        throw sgdct::ConfigError("value for " + k + " is not a number: \"" + v + "\"");
      return d;
    };
    if (k == "n_paths") {
      const double d = as_double();
      if (d < 1) throw sgdct::ConfigError("n_paths must be >= 1");
      session->overrides.n_paths = static_cast<int>(d);
    } else if (k == "seed") {
      session->overrides.seed = static_cast<std::uint64_t>(as_double());
    } else if (k == "dt") {
      session->overrides.dt = as_double();
    } else if (k == "t_end") {
      session->overrides.t_end = as_double();
    } else if (k == "workers") {
      session->overrides.workers = static_cast<int>(as_double());
    } else if (k == "sigma_bar") {
      session->overrides.sigma_bar_override = as_double();
    } else if (k == "poisson_theta") {
      session->overrides.poisson_theta = as_double();
    } else {
      throw sgdct::ConfigError("unknown override key \"" + k + "\"");
    }
  });
}

sgdct_status sgdct_session_run(sgdct_session* session, const char* command, const char* out_dir,
                               char* summary, size_t summary_len) {
  if (!session || !command) return set_error(SGDCT_ERR_CONFIG, "null argument");
  return guarded([&] {
    const std::string cmd = command;
    const std::filesystem::path out = out_dir ? out_dir : "";
    std::string text;
    if (session->is_preset) {
      if (cmd != "preset")
        throw sgdct::ConfigError("preset sessions only run the \"preset\" command");
      if (out.empty()) throw sgdct::ConfigError("preset runs need an output directory");
      const auto rows = sgdct::run_preset(session->preset_name, session->overrides, out);
      text = session->preset_name + ": " + std::to_string(rows.size()) +
             " learning-rate magnitudes -> " + (out / "summary.csv").string();
    } else {
      if (out.empty() && cmd != "variance")
        throw sgdct::ConfigError("command \"" + cmd + "\" needs an output directory");
      text = sgdct::run_command(cmd, session->config, session->overrides, out);
    }
    if (summary && summary_len > 0) {
      const size_t n = std::min(summary_len - 1, text.size());
      std::memcpy(summary, text.data(), n);
      summary[n] = '\0';
    }
  });
}

sgdct_status sgdct_session_variance(sgdct_session* session, sgdct_variance_report* report) {
  if (!session || !report) return set_error(SGDCT_ERR_CONFIG, "null argument");
  return guarded([&] {
    if (session->is_preset)
      throw sgdct::ConfigError("variance report needs a config session (one c_alpha)");
    const sgdct::DriftModel model = sgdct::model_from(session->config);
    std::optional<sgdct::DensityTable> density;
    if (model.has_x_process)
      density = sgdct::invariant_density(
          model, sgdct::QuadratureGrid{session->config.quad_half_width,
                                       session->config.quad_n_points});
    const sgdct::VarianceReport r = sgdct::limiting_variance(
        model, density ? &*density : nullptr, session->config.theta_star,
        session->config.c_alpha);
    report->c_gbar = r.c_gbar;
    report->h_bar = r.h_bar;
    report->sigma_bar = r.sigma_bar.value_or(0.0);
    report->divergent = r.regime == sgdct::VarianceRegime::divergent ? 1 : 0;
  });
}

void sgdct_session_free(sgdct_session* session) { delete session; }

}  // extern "C"

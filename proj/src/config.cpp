#include "sgdct/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "sgdct/errors.hpp"

namespace sgdct {

namespace {

using Value = std::variant<double, bool, std::string, std::vector<double>>;

struct ParsedKey {
  Value value;
  int line = 0;
};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw ConfigError(msg.str());
}

Value parse_value(const std::string& raw, const std::string& source, int line) {
  if (raw.empty()) fail(source, line, "empty value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      fail(source, line, "unterminated string value");
    return raw.substr(1, raw.size() - 2);
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  if (raw.front() == '[') {
    if (raw.back() != ']') fail(source, line, "unterminated array value");
    std::vector<double> values;
    std::string body = raw.substr(1, raw.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      char* end = nullptr;
      const double v = std::strtod(item.c_str(), &end);
      if (end != item.c_str() + item.size())
        fail(source, line, "array element \"" + item + "\" is not a number");
      values.push_back(v);
    }
    return values;
  }
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end != raw.c_str() + raw.size())
    fail(source, line, "value \"" + raw + "\" is not a number, string, boolean or array");
  return v;
}

// Flat TOML subset: '#' comments, [table] headers, key = value with value in
// {number, "string", boolean, [array of numbers]}. That is the whole config
// surface; anything richer is rejected with the offending line.
std::map<std::string, ParsedKey> parse_toml_subset(std::string_view text,
                                                   const std::string& source) {
  std::map<std::string, ParsedKey> out;
  std::string table;
  int line_no = 0;
  std::stringstream stream{std::string(text)};
  std::string line;
  while (std::getline(stream, line)) {
    ++line_no;
    // Strip comments (quotes in this schema never contain '#').
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line.resize(i);
        break;
      }
    }
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') fail(source, line_no, "malformed table header");
      table = trim(stripped.substr(1, stripped.size() - 2));
      if (table != "quadrature" && table != "malliavin")
        fail(source, line_no, "unknown table [" + table + "] (expected quadrature or malliavin)");
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) fail(source, line_no, "expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string raw = trim(stripped.substr(eq + 1));
    if (key.empty()) fail(source, line_no, "empty key");
    const std::string full = table.empty() ? key : table + "." + key;
    if (out.count(full)) fail(source, line_no, "duplicate key " + full);
    out[full] = ParsedKey{parse_value(raw, source, line_no), line_no};
  }
  return out;
}

const char* const kKnownKeys[] = {
    "model",     "theta_star", "sigma",   "c_alpha",   "c0",
    "t_start",   "dt",         "t_end",   "n_paths",   "seed",
    "x0",        "theta0",     "snapshots",
    "quadrature.L", "quadrature.n_points",
    "malliavin.anchors", "malliavin.p",
};

double want_number(const std::map<std::string, ParsedKey>& kv, const std::string& key,
                   const std::string& source) {
  const auto& pk = kv.at(key);
  if (!std::holds_alternative<double>(pk.value))
    fail(source, pk.line, "key " + key + " must be a number");
  return std::get<double>(pk.value);
}

}  // namespace

LabConfig parse_config_text(std::string_view text, const std::string& source_name) {
  const auto kv = parse_toml_subset(text, source_name);

  for (const auto& [key, pk] : kv) {
    if (std::find_if(std::begin(kKnownKeys), std::end(kKnownKeys),
                     [&](const char* k) { return key == k; }) == std::end(kKnownKeys))
      fail(source_name, pk.line, "unknown key " + key);
  }
  for (const char* required : {"model", "theta_star", "c_alpha", "dt", "t_end"}) {
    if (!kv.count(required))
      throw ConfigError(source_name + ": missing required key " + required);
  }

  LabConfig cfg;
  {
    const auto& pk = kv.at("model");
    if (!std::holds_alternative<std::string>(pk.value))
      fail(source_name, pk.line, "key model must be a string");
    cfg.model_name = std::get<std::string>(pk.value);
    parse_model_kind(cfg.model_name);  // validates the name
  }
  cfg.theta_star = want_number(kv, "theta_star", source_name);
  cfg.c_alpha = want_number(kv, "c_alpha", source_name);
  cfg.dt = want_number(kv, "dt", source_name);
  cfg.t_end = want_number(kv, "t_end", source_name);
  if (kv.count("sigma")) cfg.sigma = want_number(kv, "sigma", source_name);
  if (kv.count("c0")) cfg.c0 = want_number(kv, "c0", source_name);
  if (kv.count("t_start")) cfg.t_start = want_number(kv, "t_start", source_name);
  if (kv.count("x0")) cfg.x0 = want_number(kv, "x0", source_name);
  if (kv.count("theta0")) cfg.theta0 = want_number(kv, "theta0", source_name);
  if (kv.count("n_paths")) {
    const double n = want_number(kv, "n_paths", source_name);
    if (n < 1 || n != std::floor(n)) throw ConfigError(source_name + ": n_paths must be a positive integer");
    cfg.n_paths = static_cast<int>(n);
  }
  if (kv.count("seed")) {
    const double s = want_number(kv, "seed", source_name);
    if (s < 0 || s != std::floor(s)) throw ConfigError(source_name + ": seed must be a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (kv.count("snapshots")) {
    const auto& pk = kv.at("snapshots");
    if (std::holds_alternative<std::string>(pk.value)) {
      cfg.snapshot_schedule = std::get<std::string>(pk.value);
    } else if (std::holds_alternative<std::vector<double>>(pk.value)) {
      cfg.snapshot_list = std::get<std::vector<double>>(pk.value);
    } else {
      fail(source_name, pk.line, "key snapshots must be a schedule string or an array of times");
    }
  }
  if (kv.count("quadrature.L")) cfg.quad_half_width = want_number(kv, "quadrature.L", source_name);
  if (kv.count("quadrature.n_points")) {
    const double n = want_number(kv, "quadrature.n_points", source_name);
    if (n < 9 || n != std::floor(n))
      throw ConfigError(source_name + ": quadrature.n_points must be an integer >= 9");
    cfg.quad_n_points = static_cast<int>(n);
  }
  if (kv.count("malliavin.anchors")) {
    const auto& pk = kv.at("malliavin.anchors");
    if (!std::holds_alternative<std::vector<double>>(pk.value))
      fail(source_name, pk.line, "key malliavin.anchors must be an array of times");
    cfg.malliavin_anchors = std::get<std::vector<double>>(pk.value);
  }
  if (kv.count("malliavin.p")) {
    const double p = want_number(kv, "malliavin.p", source_name);
    if (p != 1 && p != 2) throw ConfigError(source_name + ": malliavin.p must be 1 or 2");
    cfg.malliavin_p = static_cast<int>(p);
  }
  return cfg;
}

LabConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.filename().string());
}

std::vector<double> expand_snapshots(const std::string& schedule, const std::vector<double>& list,
                                     double dt, double t_start, double t_end) {
  std::vector<double> raw;
  if (!list.empty()) {
    raw = list;
  } else {
    std::string spec = schedule;
    if (spec.empty()) {
      std::ostringstream def;
      def << "log:40:" << std::max(t_start + 10.0 * dt, (t_end - t_start) / 500.0) << ":" << t_end;
      spec = def.str();
    }
    if (spec.rfind("log:", 0) != 0)
      throw ConfigError("snapshot schedule must be \"log:<n>:<t_min>:<t_max>\" or an explicit list");
    int n = 0;
    double lo = 0.0, hi = 0.0;
    if (std::sscanf(spec.c_str(), "log:%d:%lf:%lf", &n, &lo, &hi) != 3)
      throw ConfigError("malformed snapshot schedule \"" + spec + "\"");
    if (n < 1 || !(lo > t_start) || !(hi > lo) || hi > t_end)
      throw ConfigError("snapshot schedule \"" + spec + "\" is outside (t_start, t_end]");
    raw.resize(n);
    const double ratio = n > 1 ? std::pow(hi / lo, 1.0 / (n - 1)) : 1.0;
    double t = lo;
    for (int i = 0; i < n; ++i, t *= ratio) raw[i] = t;
    raw.back() = hi;
  }
  // Generated schedules are snapped to the dt grid; explicit lists pass
  // through untouched, so an off-grid time surfaces as a config error later.
  std::vector<double> snapped;
  snapped.reserve(raw.size());
  if (!list.empty()) {
    snapped = raw;
  } else {
    for (double t : raw) {
      const double k = std::round((t - t_start) / dt);
      snapped.push_back(t_start + k * dt);
    }
  }
  for (std::size_t i = 1; i < snapped.size(); ++i) {
    if (!(snapped[i] > snapped[i - 1])) {
      std::ostringstream msg;
      msg << "snapshot schedule collapses on the dt grid near t = " << snapped[i]
          << " (times must stay strictly increasing after snapping)";
      throw ConfigError(msg.str());
    }
  }
  return snapped;
}

DriftModel model_from(const LabConfig& cfg) {
  return DriftModel::make(cfg.model_name, cfg.theta_star, cfg.sigma);
}

SimConfig sim_config_from(const LabConfig& cfg) {
  SimConfig sim;
  sim.dt = cfg.dt;
  sim.t_end = cfg.t_end;
  sim.t_start = cfg.t_start;
  sim.alpha = LearningRate{cfg.c_alpha, cfg.c0};
  sim.x0 = cfg.x0;
  sim.theta0 = cfg.theta0;
  sim.n_paths = cfg.n_paths;
  sim.master_seed = cfg.seed;
  sim.snapshot_times =
      expand_snapshots(cfg.snapshot_schedule, cfg.snapshot_list, cfg.dt, cfg.t_start, cfg.t_end);
  return sim;
}

std::string resolved_config_line(const LabConfig& cfg) {
  std::ostringstream out;
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
  };
  out << "model=" << cfg.model_name << " theta_star=" << num(cfg.theta_star)
      << " sigma=" << num(cfg.sigma) << " c_alpha=" << num(cfg.c_alpha) << " c0=" << num(cfg.c0)
      << " t_start=" << num(cfg.t_start) << " dt=" << num(cfg.dt) << " t_end=" << num(cfg.t_end)
      << " n_paths=" << cfg.n_paths << " seed=" << cfg.seed << " x0=" << num(cfg.x0)
      << " theta0=" << num(cfg.theta0);
  if (!cfg.snapshot_schedule.empty()) out << " snapshots=" << cfg.snapshot_schedule;
  return out.str();
}

}  // namespace sgdct

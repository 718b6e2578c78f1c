#include "aoisched/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/core.h>

namespace aoisched {

namespace {

struct KeySpec {
  std::string_view name;
  bool integral;
  std::function<void(SystemParams&, double)> set;
  std::function<double(const SystemParams&)> get;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"p_hap_watts", false, [](SystemParams& p, double v) { p.p_hap_watts = v; },
       [](const SystemParams& p) { return p.p_hap_watts; }},
      {"p_s_max_watts", false, [](SystemParams& p, double v) { p.p_s_max_watts = v; },
       [](const SystemParams& p) { return p.p_s_max_watts; }},
      {"power_levels", true, [](SystemParams& p, double v) { p.power_levels = static_cast<int>(v); },
       [](const SystemParams& p) { return static_cast<double>(p.power_levels); }},
      {"battery_levels", true, [](SystemParams& p, double v) { p.battery_levels = static_cast<int>(v); },
       [](const SystemParams& p) { return static_cast<double>(p.battery_levels); }},
      {"e_max_joules", false, [](SystemParams& p, double v) { p.e_max_joules = v; },
       [](const SystemParams& p) { return p.e_max_joules; }},
      {"r_bar", false, [](SystemParams& p, double v) { p.r_bar = v; },
       [](const SystemParams& p) { return p.r_bar; }},
      {"tau_s", false, [](SystemParams& p, double v) { p.tau_s = v; },
       [](const SystemParams& p) { return p.tau_s; }},
      {"eta", false, [](SystemParams& p, double v) { p.eta = v; },
       [](const SystemParams& p) { return p.eta; }},
      {"lambda0", false, [](SystemParams& p, double v) { p.lambda0 = v; },
       [](const SystemParams& p) { return p.lambda0; }},
      {"lambda1", false, [](SystemParams& p, double v) { p.lambda[0] = v; },
       [](const SystemParams& p) { return p.lambda[0]; }},
      {"lambda2", false, [](SystemParams& p, double v) { p.lambda[1] = v; },
       [](const SystemParams& p) { return p.lambda[1]; }},
      {"w1", false, [](SystemParams& p, double v) { p.weight[0] = v; },
       [](const SystemParams& p) { return p.weight[0]; }},
      {"w2", false, [](SystemParams& p, double v) { p.weight[1] = v; },
       [](const SystemParams& p) { return p.weight[1]; }},
      {"delta_max", true, [](SystemParams& p, double v) { p.delta_max = static_cast<int>(v); },
       [](const SystemParams& p) { return static_cast<double>(p.delta_max); }},
      {"snr_db", false, [](SystemParams& p, double v) { p.snr_db = v; },
       [](const SystemParams& p) { return p.snr_db; }},
      {"gamma", false, [](SystemParams& p, double v) { p.gamma = v; },
       [](const SystemParams& p) { return p.gamma; }},
      {"eps_star", false, [](SystemParams& p, double v) { p.eps_star = v; },
       [](const SystemParams& p) { return p.eps_star; }},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_value(const KeySpec& spec, std::string_view token) {
  const std::string key(spec.name);
  if (token.empty()) throw ConfigError(key, "missing value");
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  if (*begin == '+') ++begin;
  if (spec.integral) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
      throw ConfigError(key, fmt::format("expected an integer, got '{}'", token));
    }
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      throw ConfigError(key, "integer out of range");
    }
    return static_cast<double>(v);
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(key, fmt::format("expected a finite number, got '{}'", token));
  }
  return v;
}

// Rounds x to the nearest integer when it is within floating-point noise of
// one, so quantities such as 0.02 J / 1 mJ land on 20 instead of 19.
double snap(double x) {
  const double r = std::round(x);
  return std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x)) ? r : x;
}

}  // namespace

void SystemParams::validate() const {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(key, what);
  };
  require(p_hap_watts > 0.0, "p_hap_watts", "must be positive");
  require(p_s_max_watts > 0.0, "p_s_max_watts", "must be positive");
  require(power_levels >= 1, "power_levels", "must be at least 1");
  // Action codes are stored in one byte: L + 4 codes.
  require(power_levels <= 250, "power_levels", "must be at most 250");
  require(battery_levels >= 1, "battery_levels", "must be at least 1");
  require(e_max_joules > 0.0, "e_max_joules", "must be positive");
  require(r_bar >= 0.0, "r_bar", "must be non-negative");
  require(tau_s > 0.0, "tau_s", "must be positive");
  require(eta > 0.0 && eta <= 1.0, "eta", "must lie in (0, 1]");
  require(lambda0 >= 0.0, "lambda0", "must be non-negative");
  require(lambda[0] > 0.0, "lambda1", "must be positive");
  require(lambda[1] > 0.0, "lambda2", "must be positive");
  require(weight[0] >= 0.0 && weight[0] <= 1.0, "w1", "must lie in [0, 1]");
  require(weight[1] >= 0.0 && weight[1] <= 1.0, "w2", "must lie in [0, 1]");
  require(std::abs(weight[0] + weight[1] - 1.0) <= 1e-9, "w2", "weights must sum to 1 (w1 + w2 = 1)");
  require(delta_max >= 1, "delta_max", "must be at least 1");
  const double states = static_cast<double>(delta_max) * delta_max * (battery_levels + 1.0) * (battery_levels + 1.0);
  require(states < 4.0e9, "delta_max", "state space too large");
  require(gamma > 0.0 && gamma < 1.0, "gamma", "discount must lie strictly inside (0, 1)");
  require(eps_star > 0.0, "eps_star", "must be positive");
}

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> out;
    for (const auto& spec : key_table()) out.push_back(spec.name);
    return out;
  }();
  return keys;
}

SystemParams load_config(std::string_view text, bool use_defaults) {
  SystemParams params;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", fmt::format("line {}: expected 'key = value'", line_no));
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));

    const auto& table = key_table();
    const auto it = std::find_if(table.begin(), table.end(), [&](const KeySpec& s) { return s.name == key; });
    if (it == table.end()) throw ConfigError(key, "unknown key");
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
    it->set(params, parse_value(*it, value));
  }

  if (!use_defaults) {
    for (const auto& spec : key_table()) {
      if (!seen.contains(spec.name)) throw ConfigError(std::string(spec.name), "missing required key");
    }
  }
  params.validate();
  return params;
}

SystemParams load_config_file(const std::filesystem::path& path, bool use_defaults) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read config file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_config(buffer.str(), use_defaults);
}

std::vector<std::pair<std::string, std::string>> config_entries(const SystemParams& params) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& spec : key_table()) {
    const double v = spec.get(params);
    out.emplace_back(std::string(spec.name),
                     spec.integral ? fmt::format("{}", static_cast<long long>(v)) : fmt::format("{}", v));
  }
  return out;
}

std::string to_config_text(const SystemParams& params) {
  std::string out;
  for (const auto& [key, value] : config_entries(params)) out += fmt::format("{} = {}\n", key, value);
  return out;
}

DerivedParams derive(const SystemParams& params) {
  DerivedParams d;
  d.beta = std::exp2(params.r_bar) - 1.0;
  d.sigma2 = params.p_s_max_watts / std::pow(10.0, params.snr_db / 10.0);
  d.p_step = params.p_s_max_watts / params.power_levels;
  d.e_step = params.e_max_joules / params.battery_levels;

  d.cost_levels.resize(static_cast<std::size_t>(params.power_levels) + 1);
  for (int l = 0; l <= params.power_levels; ++l) {
    const double spend = l * d.p_step * params.tau_s / d.e_step;
    d.cost_levels[static_cast<std::size_t>(l)] = static_cast<int>(std::ceil(snap(spend)));
  }
  for (int n = 0; n < kDevices; ++n) {
    const double joules = params.eta * params.tau_s * params.p_hap_watts / params.lambda[static_cast<std::size_t>(n)];
    d.harvest_levels[static_cast<std::size_t>(n)] = static_cast<int>(std::min(std::floor(snap(joules / d.e_step)), 1e9));
  }
  return d;
}

}  // namespace aoisched

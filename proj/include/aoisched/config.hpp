#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aoisched/types.hpp"

namespace aoisched {

/// Raised for any problem with a configuration document. `key()` names the
/// offending key (empty when the problem is not tied to one key).
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Scenario constants. Defaults are the published two-device scenario
/// (HAP at 10 W, devices at 10 mW split in 10 power steps, 20 battery levels
/// of 1 mJ, ages truncated at 30).
struct SystemParams {
  double p_hap_watts = 10.0;
  double p_s_max_watts = 0.01;
  int power_levels = 10;
  int battery_levels = 20;
  double e_max_joules = 0.02;
  double r_bar = 2.0;  // bits/s/Hz
  double tau_s = 1.0;
  double eta = 0.5;
  double lambda0 = 1e8;  // self-interference fading parameter
  std::array<double, kDevices> lambda{250.0, 500.0};
  std::array<double, kDevices> weight{0.5, 0.5};
  int delta_max = 30;
  double snr_db = 50.0;
  double gamma = 0.8;
  double eps_star = 1e-4;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;

  bool operator==(const SystemParams&) const = default;
};

/// Quantities computed from SystemParams. Pure function of its input.
struct DerivedParams {
  double beta = 0.0;    // SNR threshold 2^R - 1
  double sigma2 = 0.0;  // noise power, P_s / 10^(snr/10)
  double p_step = 0.0;  // watts per power level
  double e_step = 0.0;  // joules per battery level
  std::vector<int> cost_levels;  // battery levels spent per slot at power level l, l = 0..L
  std::array<int, kDevices> harvest_levels{};  // battery levels gained per charged slot

  int cost(int power_level) const { return cost_levels.at(static_cast<std::size_t>(power_level)); }
};

/// Parses a `key = value` document (`#` starts a comment). With
/// `use_defaults`, absent keys keep their SystemParams default; otherwise
/// every key is required. Unknown keys, duplicates, bad numbers and
/// violated invariants all raise ConfigError.
SystemParams load_config(std::string_view text, bool use_defaults = true);
SystemParams load_config_file(const std::filesystem::path& path, bool use_defaults = true);

/// The recognised keys, in canonical order.
const std::vector<std::string_view>& config_keys();

/// Resolved configuration as (key, value) pairs in canonical order. Values are
/// printed with round-trip precision so `load_config(to_config_text(p)) == p`.
std::vector<std::pair<std::string, std::string>> config_entries(const SystemParams& params);
std::string to_config_text(const SystemParams& params);

DerivedParams derive(const SystemParams& params);

}  // namespace aoisched

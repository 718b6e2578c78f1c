#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>
#include <string_view>

#include "aoisched/config.hpp"

namespace aoisched {

enum class Scheme : std::uint8_t { Wet, Oma, Noma, WetOma };

std::string_view scheme_name(Scheme scheme);

/// Per-slot outage probability of each device under one scheme. A device that
/// does not transmit has outage exactly 1.
struct OutagePair {
  std::array<double, kDevices> p_out{1.0, 1.0};
};

/// What the HAP and the devices do in one slot, in physical units.
/// A device transmits iff its power is positive; `wet` means the HAP charges
/// every device that is not transmitting.
struct SlotPlan {
  bool wet = false;
  std::array<double, kDevices> power{0.0, 0.0};

  bool transmits(int device) const { return power[static_cast<std::size_t>(device)] > 0.0; }
  Scheme scheme() const;
};

struct SlotOutcome {
  std::array<bool, kDevices> success{false, false};
  std::array<double, kDevices> harvested{0.0, 0.0};  // joules
};

/// How the HAP orders the two NOMA signals for successive interference
/// cancellation. `MeanPower` ranks by P_n / lambda_n once (ties favour device
/// 1); `Instantaneous` ranks the received powers of each fading draw.
enum class DecodingOrder : std::uint8_t { MeanPower, Instantaneous };

enum class HarvestMode : std::uint8_t { Deterministic, Sampled };

/// Seeded random stream with a platform-independent uniform and exponential
/// transform on top of mt19937_64.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

struct McEstimate {
  std::array<double, kDevices> outage{1.0, 1.0};
  std::array<double, kDevices> std_error{0.0, 0.0};
  std::uint64_t samples = 0;
};

/// Outage probabilities and harvested energy for the two-device uplink with
/// Rayleigh fading (exponential channel gains with rates lambda_n and a
/// self-interference gain with rate lambda0). Zero power is treated as no
/// transmission: outage 1, never an error.
class LinkModel {
 public:
  explicit LinkModel(const SystemParams& params);
  LinkModel(const SystemParams& params, const DerivedParams& derived);

  const SystemParams& params() const { return params_; }
  const DerivedParams& derived() const { return derived_; }

  /// 1 - exp(-lambda_n beta sigma^2 / P).
  double outage_oma(int device, double power) const;

  /// Both devices transmit. The device with the larger mean received power is
  /// decoded first with the other as interference; the second is decoded
  /// only after the first is removed, so its value is the joint success
  /// complement. A zero power degrades to single-device OMA.
  OutagePair outage_noma(double p1, double p2) const;

  /// OMA under concurrent charging: the HAP's own transmission leaks in with
  /// fading rate lambda0.
  double outage_wet_oma(int device, double power) const;

  /// eta * tau * P_H / lambda_n: expected harvest of a charged, idle device.
  double mean_harvest(int device) const;

  /// Index (0 or 1) of the device decoded first under mean-power ordering.
  int first_decoded(double p1, double p2) const;

  /// Analytic per-device outage for any plan.
  OutagePair outage(const SlotPlan& plan) const;

  /// One fading realisation. Draws the two channel gains and the
  /// self-interference gain every call so streams stay aligned across plans.
  SlotOutcome sample_slot_outcome(const SlotPlan& plan, RngStream& rng,
                                  HarvestMode harvest = HarvestMode::Deterministic,
                                  DecodingOrder order = DecodingOrder::Instantaneous) const;

  /// Empirical outage frequency with binomial standard errors.
  McEstimate mc_outage_estimate(const SlotPlan& plan, std::uint64_t n_samples, std::uint64_t seed,
                                DecodingOrder order = DecodingOrder::MeanPower) const;

 private:
  bool decodable(double sinr) const;

  SystemParams params_;
  DerivedParams derived_;
};

}  // namespace aoisched

namespace aoisched {

/// One row of the analytic-versus-sampling outage audit.
struct OutageCheck {
  std::string scheme;  // "OMA", "WET+OMA", "NOMA"
  int device = 0;      // 0-based
  double alpha1 = 0.0;  // device-1 power fraction
  double analytic = 0.0;
  double mc = 0.0;
  double std_error = 0.0;
  bool pass = false;  // |analytic - mc| <= 4 std_error
  std::optional<double> mc_instantaneous;  // NOMA only, reported unasserted
};

/// OMA and WET+OMA for each device at full power, then NOMA for every power
/// split l/L, l = 1..L-1. NOMA is sampled under the mean-power decoding
/// order; the instantaneous-order estimate is attached for reference.
/// Row k uses seed + k.
std::vector<OutageCheck> outage_audit(const LinkModel& link, std::uint64_t n_samples, std::uint64_t seed);

}  // namespace aoisched

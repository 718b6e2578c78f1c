#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "aoisched/baselines.hpp"
#include "aoisched/link.hpp"
#include "aoisched/mdp.hpp"

namespace aoisched {

/// `Kernel` draws outcomes from the MDP's own success probabilities;
/// `Physical` draws fading gains and decodes with SIC.
enum class SimMode : std::uint8_t { Kernel, Physical };

struct SimConfig {
  std::size_t horizon = 1000;
  std::size_t n_episodes = 1000;
  std::uint64_t base_seed = 1;
  SimMode mode = SimMode::Kernel;
  HarvestMode harvest = HarvestMode::Deterministic;
  DecodingOrder order = DecodingOrder::Instantaneous;  // physical mode only
  unsigned threads = 1;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

struct SlotRecord {
  State state;  // at the start of the slot
  ActionCode action = 0;
  std::array<bool, kDevices> success{false, false};
  std::array<int, kDevices> harvested{0, 0};  // battery levels
};

struct EpisodeTrace {
  std::vector<SlotRecord> slots;
  State final_state;
  double ewsaoi = 0.0;  // (1/T) sum over the T post-slot states
  std::array<double, kDevices> mean_age{0.0, 0.0};
};

struct MetricReport {
  double mean = 0.0;
  std::optional<double> std_error;  // absent for a single episode
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::array<double, kDevices> mean_age{0.0, 0.0};
  std::array<double, 4> scheme_usage{};  // fraction of slots, indexed by Scheme
  std::size_t horizon = 0;
  std::size_t episodes = 0;
};

/// Simulates `config.horizon` slots from s0. Throws SimulationError when the
/// policy picks an action the battery cannot pay for.
EpisodeTrace run_episode(const NetworkMdp& mdp, std::span<const ActionCode> policy, const State& s0,
                         const SimConfig& config, RngStream& rng);

/// Episode i uses seed base_seed + i; results do not depend on thread count.
MetricReport estimate_ewsaoi(const NetworkMdp& mdp, std::span<const ActionCode> policy, const State& s0,
                             const SimConfig& config);

struct SweepRow {
  double snr_db = 0.0;
  Preset preset = Preset::Adaptive;
  MetricReport report;
  std::size_t policy_iterations = 0;
};

/// Re-solves each preset at each SNR and simulates from s0. Rows are
/// ordered by SNR, then by preset in the order given.
std::vector<SweepRow> snr_sweep(const SystemParams& params, std::span<const Preset> presets,
                                std::span<const double> snr_db, const State& s0, const SimConfig& config,
                                const SolverOptions& options = {},
                                const std::function<void(const SweepRow&)>& progress = {});

}  // namespace aoisched

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aoisched/config.hpp"
#include "aoisched/link.hpp"
#include "aoisched/mdp.hpp"
#include "aoisched/simulator.hpp"
#include "aoisched/solver.hpp"

namespace aoisched {

/// Provenance written as a `#` comment block at the top of every text output.
struct RunInfo {
  std::string command_line;
  std::optional<std::uint64_t> seed;
  std::optional<SystemParams> params;
  std::vector<std::pair<std::string, std::string>> extra;
};

/// SHA-1 of `body` hashed as a git blob ("blob <size>\0" prefix), hex encoded.
std::string git_blob_sha1(std::string_view body);

/// Metadata block for `body`: version, command line, seed, content hash,
/// extra fields and the resolved configuration.
std::string metadata_block(const RunInfo& info, std::string_view body);

/// Writes `metadata_block(info, body) + body`. Throws IoError naming the path.
void write_with_metadata(const std::filesystem::path& path, const RunInfo& info, std::string_view body);
void write_file(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Data lines of a file written with metadata (comment lines dropped).
std::string strip_metadata(std::string_view content);

// Policy binary: "AOIP", version byte 1, state count as u64 little endian,
// then one action-code byte per state.
inline constexpr std::uint8_t kPolicyFormatVersion = 1;
std::string encode_policy(std::span<const ActionCode> policy);
Policy decode_policy(std::string_view bytes);
void write_policy_binary(const std::filesystem::path& path, std::span<const ActionCode> policy);
Policy read_policy_binary(const std::filesystem::path& path);

std::string policy_csv(const NetworkMdp& mdp, std::span<const ActionCode> policy);
std::string value_csv(const NetworkMdp& mdp, std::span<const double> value);
std::string solve_log_csv(const SolveLog& log);
/// `state_index,action_code,next_state_index,probability`, every admissible action.
std::string kernel_csv(const NetworkMdp& mdp);
std::string trace_csv(const EpisodeTrace& trace);
std::string report_csv(const MetricReport& report);
std::string sweep_csv(std::span<const SweepRow> rows);
std::string outage_audit_csv(std::span<const OutageCheck> rows);

/// Policy restricted to one battery slice (e1, e2), over all (delta1, delta2).
struct PolicyGrid {
  int e1 = 0;
  int e2 = 0;
  int delta_max = 0;
  std::vector<int> scheme_code;    // row-major, delta1 major; 1 WET+OMA, 2 OMA, 3 WET, 4 NOMA
  std::vector<ActionCode> action;  // same layout

  int code_at(int delta1, int delta2) const { return scheme_code.at(offset(delta1, delta2)); }
  ActionCode action_at(int delta1, int delta2) const { return action.at(offset(delta1, delta2)); }
  std::size_t count(int code) const;

 private:
  std::size_t offset(int delta1, int delta2) const {
    return static_cast<std::size_t>((delta1 - 1) * delta_max + (delta2 - 1));
  }
};

/// Throws ModelError when a level is outside [0, M] or the policy size is wrong.
PolicyGrid policy_grid(const NetworkMdp& mdp, std::span<const ActionCode> policy, int e1, int e2);

/// Header `delta1,d2_1..d2_N,actions`; one row per delta1 holding scheme
/// codes, with the full action codes of the row `;`-joined in the last column.
std::string policy_grid_csv(const PolicyGrid& grid);

}  // namespace aoisched

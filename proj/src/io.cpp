#include "aoisched/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/core.h>
#include <openssl/evp.h>

#include "aoisched/baselines.hpp"

#ifndef AOISCHED_VERSION
#define AOISCHED_VERSION "dev"
#endif

namespace aoisched {

std::string git_blob_sha1(std::string_view body) {
  const std::string header = fmt::format("blob {}", body.size());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("cannot allocate SHA-1 context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size() + 1) == 1 &&  // includes the NUL
                  EVP_DigestUpdate(ctx, body.data(), body.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("SHA-1 computation failed");
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string metadata_block(const RunInfo& info, std::string_view body) {
  std::string out = fmt::format("# aoisched {}\n", AOISCHED_VERSION);
  if (!info.command_line.empty()) out += fmt::format("# command: {}\n", info.command_line);
  if (info.seed) out += fmt::format("# seed: {}\n", *info.seed);
  out += fmt::format("# content-sha1: {}\n", git_blob_sha1(body));
  for (const auto& [key, value] : info.extra) out += fmt::format("# {}: {}\n", key, value);
  if (info.params) {
    out += "# config:\n";
    for (const auto& [key, value] : config_entries(*info.params)) out += fmt::format("#   {} = {}\n", key, value);
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

void write_with_metadata(const std::filesystem::path& path, const RunInfo& info, std::string_view body) {
  write_file(path, metadata_block(info, body) + std::string(body));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string strip_metadata(std::string_view content) {
  std::string out;
  while (!content.empty()) {
    const auto nl = content.find('\n');
    const auto line = content.substr(0, nl == std::string_view::npos ? content.size() : nl + 1);
    content.remove_prefix(line.size());
    if (!line.starts_with('#')) out += line;
  }
  return out;
}

std::string encode_policy(std::span<const ActionCode> policy) {
  std::string bytes = "AOIP";
  bytes.push_back(static_cast<char>(kPolicyFormatVersion));
  std::uint64_t n = policy.size();
  for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>((n >> (8 * i)) & 0xff));
  bytes.append(reinterpret_cast<const char*>(policy.data()), policy.size());
  return bytes;
}

Policy decode_policy(std::string_view bytes) {
  if (bytes.size() < 13 || bytes.substr(0, 4) != "AOIP") throw IoError("not a policy file (bad magic)");
  if (static_cast<std::uint8_t>(bytes[4]) != kPolicyFormatVersion) {
    throw IoError(fmt::format("unsupported policy format version {}", static_cast<int>(bytes[4])));
  }
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes[5 + i])) << (8 * i);
  if (bytes.size() - 13 != n) {
    throw IoError(fmt::format("policy file declares {} states but holds {}", n, bytes.size() - 13));
  }
  Policy policy(n);
  std::copy(bytes.begin() + 13, bytes.end(), reinterpret_cast<char*>(policy.data()));
  return policy;
}

void write_policy_binary(const std::filesystem::path& path, std::span<const ActionCode> policy) {
  write_file(path, encode_policy(policy));
}

Policy read_policy_binary(const std::filesystem::path& path) {
  try {
    return decode_policy(read_file(path));
  } catch (const IoError& e) {
    throw IoError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string policy_csv(const NetworkMdp& mdp, std::span<const ActionCode> policy) {
  std::string out = "state_index,delta1,delta2,e1,e2,action_code,action,scheme\n";
  const int levels = mdp.params().power_levels;
  for (std::size_t i = 0; i < policy.size(); ++i) {
    const State s = mdp.space().state(static_cast<StateIndex>(i));
    const Action& a = mdp.action(policy[i]);
    out += fmt::format("{},{},{},{},{},{},\"{}\",{}\n", i, s.delta[0], s.delta[1], s.energy[0], s.energy[1],
                       policy[i], a.label(levels), scheme_name(a.scheme()));
  }
  return out;
}

std::string value_csv(const NetworkMdp& mdp, std::span<const double> value) {
  std::string out = "state_index,delta1,delta2,e1,e2,value\n";
  for (std::size_t i = 0; i < value.size(); ++i) {
    const State s = mdp.space().state(static_cast<StateIndex>(i));
    out += fmt::format("{},{},{},{},{},{}\n", i, s.delta[0], s.delta[1], s.energy[0], s.energy[1], value[i]);
  }
  return out;
}

std::string solve_log_csv(const SolveLog& log) {
  std::string out = "phase,iteration,residual,policy_changes\n";
  for (const auto& e : log.entries) {
    out += fmt::format("{},{},{},{}\n", phase_name(e.phase), e.iteration, e.residual, e.policy_changes);
  }
  return out;
}

std::string kernel_csv(const NetworkMdp& mdp) {
  std::string out = "state_index,action_code,next_state_index,probability\n";
  for (std::size_t i = 0; i < mdp.num_states(); ++i) {
    const auto s = static_cast<StateIndex>(i);
    for (const ActionCode a : mdp.actions(s)) {
      for (const auto& t : mdp.successors(s, a)) out += fmt::format("{},{},{},{}\n", s, a, t.next, t.probability);
    }
  }
  return out;
}

std::string trace_csv(const EpisodeTrace& trace) {
  std::string out = "t,delta1,delta2,e1,e2,action_code,succ1,succ2\n";
  for (std::size_t t = 0; t < trace.slots.size(); ++t) {
    const auto& r = trace.slots[t];
    out += fmt::format("{},{},{},{},{},{},{},{}\n", t, r.state.delta[0], r.state.delta[1], r.state.energy[0],
                       r.state.energy[1], r.action, r.success[0] ? 1 : 0, r.success[1] ? 1 : 0);
  }
  return out;
}

namespace {
std::string optional_number(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }
}  // namespace

std::string report_csv(const MetricReport& r) {
  std::string out =
      "ewsaoi_mean,stderr,ci95_low,ci95_high,mean_age1,mean_age2,usage_wet,usage_oma,usage_noma,usage_wetoma,"
      "horizon,episodes\n";
  out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.mean, optional_number(r.std_error),
                     optional_number(r.ci_low), optional_number(r.ci_high), r.mean_age[0], r.mean_age[1],
                     r.scheme_usage[0], r.scheme_usage[1], r.scheme_usage[2], r.scheme_usage[3], r.horizon,
                     r.episodes);
  return out;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out = "snr_db,preset,ewsaoi_mean,stderr,ci95_low,ci95_high\n";
  for (const auto& row : rows) {
    out += fmt::format("{},{},{},{},{},{}\n", row.snr_db, preset_name(row.preset), row.report.mean,
                       optional_number(row.report.std_error), optional_number(row.report.ci_low),
                       optional_number(row.report.ci_high));
  }
  return out;
}

std::string outage_audit_csv(std::span<const OutageCheck> rows) {
  std::string out = "scheme,device,alpha1,analytic,mc,stderr,pass,mc_instantaneous_order\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.scheme, r.device + 1, r.alpha1, r.analytic, r.mc, r.std_error,
                       r.pass ? "pass" : "fail", optional_number(r.mc_instantaneous));
  }
  return out;
}

std::size_t PolicyGrid::count(int code) const {
  return static_cast<std::size_t>(std::count(scheme_code.begin(), scheme_code.end(), code));
}

PolicyGrid policy_grid(const NetworkMdp& mdp, std::span<const ActionCode> policy, int e1, int e2) {
  const int m = mdp.params().battery_levels;
  if (e1 < 0 || e1 > m || e2 < 0 || e2 > m) {
    throw ModelError(fmt::format("battery slice ({},{}) outside [0, {}]", e1, e2, m));
  }
  if (policy.size() != mdp.num_states()) {
    throw ModelError(fmt::format("policy covers {} states, model has {}", policy.size(), mdp.num_states()));
  }
  PolicyGrid grid;
  grid.e1 = e1;
  grid.e2 = e2;
  grid.delta_max = mdp.params().delta_max;
  for (int d1 = 1; d1 <= grid.delta_max; ++d1) {
    for (int d2 = 1; d2 <= grid.delta_max; ++d2) {
      const ActionCode a = policy[mdp.space().index_unchecked(d1, d2, e1, e2)];
      if (a >= mdp.alphabet().size()) throw ModelError(fmt::format("unknown action code {} in policy", a));
      grid.action.push_back(a);
      grid.scheme_code.push_back(scheme_grid_code(mdp.action(a).scheme()));
    }
  }
  return grid;
}

std::string policy_grid_csv(const PolicyGrid& grid) {
  std::string out = "delta1";
  for (int d2 = 1; d2 <= grid.delta_max; ++d2) out += fmt::format(",d2_{}", d2);
  out += ",actions\n";
  for (int d1 = 1; d1 <= grid.delta_max; ++d1) {
    out += fmt::format("{}", d1);
    std::string actions;
    for (int d2 = 1; d2 <= grid.delta_max; ++d2) {
      out += fmt::format(",{}", grid.code_at(d1, d2));
      if (d2 > 1) actions += ';';
      actions += fmt::format("{}", grid.action_at(d1, d2));
    }
    out += fmt::format(",{}\n", actions);
  }
  return out;
}

}  // namespace aoisched

#include <doctest.h>

#include <filesystem>

#include "aoisched/io.hpp"

using namespace aoisched;

TEST_CASE("policy binary round trip") {
  const Policy policy{0, 1, 2, 13, 7, 0};
  const std::string bytes = encode_policy(policy);
  CHECK(bytes.size() == 13 + policy.size());
  CHECK(bytes.substr(0, 4) == "AOIP");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 6);
  for (int i = 6; i < 13; ++i) CHECK(bytes[i] == 0);
  CHECK(decode_policy(bytes) == policy);
  CHECK(decode_policy(encode_policy(Policy{})).empty());

  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_policy(bad), IoError);
  bad = bytes;
  bad[4] = 2;
  CHECK_THROWS_AS(decode_policy(bad), IoError);
  CHECK_THROWS_AS(decode_policy(bytes.substr(0, bytes.size() - 1)), IoError);
  CHECK_THROWS_AS(decode_policy("AOI"), IoError);

  const auto path = std::filesystem::temp_directory_path() / "aoisched_io_test.bin";
  write_policy_binary(path, policy);
  CHECK(read_policy_binary(path) == policy);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_policy_binary(path), IoError);
}

TEST_CASE("content hash matches git blob hashing") {
  // `printf 'hello\n' | git hash-object --stdin`
  CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("metadata block") {
  RunInfo info;
  info.command_line = "aoisched solve";
  info.seed = 7;
  info.params = SystemParams{};
  info.extra = {{"preset", "adaptive"}};
  const std::string body = "a,b\n1,2\n";
  const std::string block = metadata_block(info, body);
  CHECK(block.find("# command: aoisched solve\n") != std::string::npos);
  CHECK(block.find("# seed: 7\n") != std::string::npos);
  CHECK(block.find("# preset: adaptive\n") != std::string::npos);
  CHECK(block.find("#   gamma = 0.8\n") != std::string::npos);
  CHECK(block.find("# content-sha1: " + git_blob_sha1(body)) != std::string::npos);
  CHECK(strip_metadata(block + body) == body);
  CHECK_THROWS_AS(write_file("/nonexistent-dir/x.csv", "x"), IoError);
}

TEST_CASE("policy grid at an empty battery slice") {
  const NetworkMdp mdp{SystemParams{}};
  Policy policy(mdp.num_states(), 0);
  const PolicyGrid grid = policy_grid(mdp, policy, 0, 0);
  CHECK(grid.scheme_code.size() == 900);
  CHECK(grid.count(3) == 900);
  const std::string csv = policy_grid_csv(grid);
  CHECK(csv.substr(0, csv.find('\n')).find("delta1,d2_1,d2_2") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 31);
  CHECK_THROWS_AS(policy_grid(mdp, policy, 21, 0), ModelError);
  CHECK_THROWS_AS(policy_grid(mdp, Policy(5, 0), 0, 0), ModelError);
}

TEST_CASE("csv layouts") {
  MetricReport r;
  r.mean = 2.5;
  r.horizon = 10;
  r.episodes = 1;
  const std::string csv = report_csv(r);
  CHECK(csv.find("ewsaoi_mean,stderr,ci95_low") == 0);
  CHECK(csv.find("\n2.5,,,,") != std::string::npos);

  SolveLog log;
  log.entries.push_back({SolveLogEntry::Phase::Evaluate, 1, 0.5, 0});
  log.entries.push_back({SolveLogEntry::Phase::Improve, 1, 0.25, 3});
  CHECK(solve_log_csv(log) == "phase,iteration,residual,policy_changes\nevaluate,1,0.5,0\nimprove,1,0.25,3\n");
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpsim/async.hpp"
#include "dpsim/instances.hpp"
#include "dpsim/mdp.hpp"

namespace dpsim {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Algorithm { sdbp, broadcast, gossip, async_sdbp, sdbp_bandwidth };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<TopologySpec> topologies;
  std::vector<Algorithm> algorithms;
  double gamma = 0.95;
  double epsilon = 0.01;
  double delta = 0.0;
  NoiseMode noise_mode = NoiseMode::none;
  RandomMdpParams mdp;
  std::vector<std::uint64_t> seeds{0};
  std::uint64_t round_budget = 50000;
  std::uint64_t delay = 1;
  DelayMode schedule = DelayMode::adversarial_max;
  std::optional<std::uint64_t> bandwidth_bits;
  unsigned value_width = 64;
  std::string output_dir = "out";
  std::size_t workers = 1;

  /// Throws ContractViolation on invalid combinations.
  void validate() const;
};

/// YAML config. Unknown keys are rejected with their location.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);
std::string config_to_yaml(const ExperimentConfig& config);
/// Hex digest of the canonical YAML form.
std::string config_hash(const ExperimentConfig& config);

struct RunRecord {
  std::string topology;
  std::size_t machines = 0;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::sdbp;
  std::optional<std::uint64_t> rounds_to_target;
  bool budget_exceeded = false;
  double final_error = 0.0;
  double gap = 0.0;
  double phi = 0.0;
  std::size_t diameter = 0;
  std::size_t lower_bound = 0;
  /// Violations of the algorithm's own upper bound(s) across all rounds.
  std::size_t bound_violations = 0;
  std::size_t bound_checks = 0;
  std::string csv_file;
};

struct SummaryRow {
  std::string topology;
  std::size_t machines = 0;
  double phi = 0.0;
  double gap = 0.0;
  /// Per algorithm, in config order: mean, std over seeds and exceed count.
  struct Cell {
    double mean = 0.0;
    double std = 0.0;
    std::size_t exceeded = 0;
    std::size_t runs = 0;
  };
  std::vector<Cell> cells;
  std::size_t lower_bound = 0;
};

struct RunSummary {
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> rows;
  std::string markdown;
  std::string csv;
  std::string manifest;
};

/// Runs every (topology, seed, algorithm) combination and, when `write` is
/// set, writes runs/*.csv, summary.md, summary.csv and manifest.json under
/// config.output_dir.
RunSummary cmd_run(const ExperimentConfig& config, bool write = true);

struct AnalyzeReport {
  std::size_t machines = 0;
  std::size_t diameter = 0;
  double phi_graph = 0.0;
  double phi_mixing = 0.0;
  bool phi_exhaustive = false;
  double gap = 0.0;
  double gamma = 0.0;
  double epsilon = 0.0;
  std::size_t l_eps = 0;
  std::uint64_t delay = 1;
  std::uint64_t direct_rounds = 0;
  std::uint64_t async_rounds = 0;
  std::optional<std::uint64_t> gossip_rounds;
  CheegerReport cheeger;

  std::string to_text() const;
  std::string to_json() const;
};

AnalyzeReport cmd_analyze(const Mdp& mdp, const ShardedDataset& data, double epsilon,
                          std::uint64_t delay = 1);
AnalyzeReport cmd_analyze_files(const std::string& mdp_path, const std::string& partition_path,
                                double epsilon, std::uint64_t delay = 1);

enum class VerifySuite { locality, bits, async, gossip_recursion, all };

std::string to_string(VerifySuite s);
VerifySuite verify_suite_from_string(const std::string& s);

struct VerifyCheck {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifySummary {
  std::vector<VerifyCheck> checks;
  bool all_pass() const;
  std::string to_text() const;
};

VerifySummary cmd_verify(VerifySuite suite);

}  // namespace dpsim

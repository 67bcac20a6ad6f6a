#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpsim/accounting.hpp"
#include "dpsim/depgraph.hpp"
#include "dpsim/mdp.hpp"

namespace dpsim {

/// One row of a run trace. Row t describes the iterate after t rounds.
struct RoundRecord {
  std::uint64_t round = 0;
  double sup_error = 0.0;
  double mean_error = 0.0;
  double disagreement = 0.0;
  std::uint64_t cum_bits_total = 0;
};

/// Per-step series of a gossip run. Index t holds E_t, D_t; the step
/// quantities at index t describe the transition t -> t+1.
struct GossipTrace {
  std::vector<double> mean_error;        // E_t = ||Vbar_t - V*||
  std::vector<double> disagreement;      // D_t = max_j ||V_j,t - Vbar_t||
  std::vector<double> delta_eff;         // max_j ||U_j - T V_j|| at step t
  std::vector<double> local_disagreement;// max_j ||U_j - Ubar|| at step t
  // Same spreads measured per state as a Euclidean norm across machines, max over states.
  std::vector<double> disagreement_l2;
  std::vector<double> local_disagreement_l2;
};

struct BatchSnapshot {
  std::uint64_t batch = 0;
  std::uint64_t round = 0;  // b * D
  ValueTable values;
  double sup_error = 0.0;
};

struct RunMeta {
  std::string algorithm;
  std::string topology;
  std::size_t machines = 0;
  double gamma = 0.0;
  std::optional<double> epsilon;
  double delta = 0.0;
  double gap = 0.0;
  double phi = 0.0;
  std::size_t diameter = 0;
  std::uint64_t delay = 1;
};

struct RunReport {
  RunMeta meta;
  std::vector<RoundRecord> rounds;
  std::optional<std::uint64_t> rounds_to_target;
  bool budget_exceeded = false;
  /// Assembled global table (SDBP, broadcast) or the machine average (gossip).
  ValueTable final_values;
  /// Per-machine output: owned values (SDBP family) or the full table (gossip).
  std::vector<std::vector<double>> machine_outputs;
  std::vector<ValueTable> history;
  BitLedger bits;
  TranscriptLog transcripts;
  std::optional<GossipTrace> gossip;
  std::vector<BatchSnapshot> batches;
};

struct RunOptions {
  /// Round budget T.
  std::uint64_t rounds = 0;
  std::optional<double> target;
  bool stop_at_target = true;
  bool record_history = false;
  bool record_transcripts = false;
  unsigned value_width = 64;
  /// Additional local Bellman sweeps per round (SDBP family).
  std::size_t extra_local_sweeps = 0;
  /// Gossip: record delta_eff and pre-mixing disagreement each step.
  bool track_recursion = false;
  /// Randomized SDBP wrapper: permutes payload order per (round, edge).
  std::optional<std::uint64_t> shuffle_seed;
  /// Reference V*; solved at 1e-10 when absent.
  std::optional<ValueTable> vstar;
  std::string topology_label;
};

inline constexpr double kOracleTolerance = 1e-10;
inline constexpr std::uint64_t kDefaultRoundBudget = 50000;

/// Synchronous direct boundary propagation: each round every machine sends
/// its boundary values to the neighbours that consume them, then backs up
/// its own states from local values and cached boundary values.
RunReport run_sdbp(const Mdp& mdp, const ShardedDataset& data, const DepGraph& g,
                   const DeltaNoise& noise, const RunOptions& options);

/// SDBP with at most `bandwidth_bits` per directed edge per round. Changed
/// boundary values wait in a per-edge FIFO (a queued state is refreshed in
/// place). nullopt bandwidth means uncapped.
RunReport run_sdbp_bandwidth(const Mdp& mdp, const ShardedDataset& data, const DepGraph& g,
                             const DeltaNoise& noise, std::optional<std::uint64_t> bandwidth_bits,
                             const RunOptions& options);

/// Gossip fitted value iteration. Machine j refreshes its owned coordinates
/// with an exact backup on its own full table, the local operator's noise
/// lands on every output coordinate, then tables are mixed with W.
RunReport run_gossip_fvi(const Mdp& mdp, const ShardedDataset& data, const DepGraph& g,
                         const MixingMatrix& w, const DeltaNoise& noise, const RunOptions& options);

/// Centralized value iteration with the same noisy operators, one sweep per round.
RunReport run_broadcast(const Mdp& mdp, const ShardedDataset& data, const DeltaNoise& noise,
                        const RunOptions& options);

/// Full-information protocol: every round each machine forwards all shard
/// data it knows, then solves the MDP restricted to what it knows (unknown
/// successors valued at the initialization 0). Small instances only.
RunReport run_flood(const Mdp& mdp, const ShardedDataset& data, const DepGraph& g,
                    const RunOptions& options);

enum class ProtocolKind { sdbp, gossip, flood, broadcast };

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::sdbp;
  std::size_t extra_local_sweeps = 0;
  DeltaNoise noise;
};

std::string to_string(ProtocolKind kind);

struct IndistinguishabilityVerdict {
  bool pass = false;
  std::optional<std::uint64_t> first_divergence_round;
  double output_gap = 0.0;
  std::string detail;
};

enum class Precondition { enforce, report };

/// Runs `protocol` for `rounds` rounds on both instances (same ownership,
/// same seeds) and compares what machine u received and output. Throws
/// ContractViolation when the instances do not share a support graph, and
/// (under Precondition::enforce) with a witness when they differ on a
/// machine within distance `rounds` of u. Precondition::report runs anyway
/// and names the witness in the verdict detail.
IndistinguishabilityVerdict indistinguishability_check(const ProtocolSpec& protocol,
                                                       const Mdp& first, const Mdp& second,
                                                       const std::vector<MachineId>& ownership,
                                                       std::size_t n_machines, MachineId u,
                                                       std::size_t rounds,
                                                       Precondition mode = Precondition::enforce);

/// Machines whose owned rows (dynamics or rewards) differ between a and b.
std::vector<MachineId> differing_machines(const Mdp& a, const Mdp& b,
                                          const std::vector<MachineId>& ownership,
                                          std::size_t n_machines);

// RunReport export.
std::string report_csv(const RunReport& report);
std::string report_summary_json(const RunReport& report);

}  // namespace dpsim

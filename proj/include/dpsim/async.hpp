#pragma once

#include <cstdint>
#include <string>

#include "dpsim/protocols.hpp"

namespace dpsim {

enum class DelayMode { adversarial_max, uniform_random, per_edge_fixed };

std::string to_string(DelayMode mode);
DelayMode delay_mode_from_string(const std::string& s);

/// Bounded-delay message schedule. Every message is consumed within D - 1
/// rounds of being sent and every machine updates at least once per D rounds.
///
/// adversarial_max holds every message exactly D - 1 rounds and lets each
/// machine update once per batch, in the batch's last round (every round
/// when partial_batch_updates is set). uniform_random draws each message's
/// delay from {0, ..., D - 1}; per_edge_fixed draws one delay per directed
/// edge. Both update every `cadence` rounds.
class DelaySchedule {
 public:
  DelaySchedule(DelayMode mode, std::uint64_t d, std::uint64_t seed = 0, std::uint64_t cadence = 1,
                bool partial_batch_updates = false);

  DelayMode mode() const noexcept { return mode_; }
  std::uint64_t d() const noexcept { return d_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t cadence() const noexcept { return cadence_; }
  bool partial_batch_updates() const noexcept { return partial_; }

  std::uint64_t delay(MachineId from, MachineId to, std::uint64_t round) const;
  bool updates(MachineId machine, std::uint64_t round) const;

 private:
  DelayMode mode_;
  std::uint64_t d_;
  std::uint64_t seed_;
  std::uint64_t cadence_;
  bool partial_;
};

/// Asynchronous direct boundary propagation. Each wall-clock round: every
/// machine sends its boundary values (delivered after the scheduled delay),
/// consumes everything deliverable, then backs up its owned states if the
/// schedule allows. Batch snapshots are taken after every D rounds.
RunReport run_async_sdbp(const Mdp& mdp, const ShardedDataset& data, const DepGraph& g,
                         const DeltaNoise& noise, const DelaySchedule& schedule,
                         const RunOptions& options);

struct LightconeVerdict {
  bool pass = false;
  double max_gap = 0.0;
  std::size_t perturbed_machines = 0;
  std::string detail;
};

/// Re-runs with the rewards of every machine at distance >= min_distance
/// from j replaced by 1 - r, and compares j's owned values in batch b.
/// min_distance defaults to b + 1, where the values must not move.
LightconeVerdict batch_lightcone_check(const Mdp& mdp, const ShardedDataset& data,
                                       const DepGraph& g, const DeltaNoise& noise,
                                       const DelaySchedule& schedule, MachineId j,
                                       std::uint64_t batch,
                                       std::optional<std::size_t> min_distance = {});

/// D * L_eps wall-clock rounds.
std::uint64_t async_round_bound(double gamma, double epsilon, std::uint64_t d);

}  // namespace dpsim

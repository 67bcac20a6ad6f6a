#pragma once

#include <algorithm>
#include <vector>

#include "dpsim/protocols.hpp"

namespace dpsim::detail {

inline ValueTable reference_values(const Mdp& mdp, const RunOptions& options) {
  if (options.vstar) {
    if (options.vstar->size() != mdp.n_states()) {
      throw ContractViolation("RunOptions::vstar does not match the MDP");
    }
    return *options.vstar;
  }
  return solve_vstar(mdp, kOracleTolerance);
}

/// Appends trace rows and tracks the first round that meets the target.
class TraceRecorder {
 public:
  TraceRecorder(RunReport& report, const RunOptions& options)
      : report_(report), options_(options) {}

  /// Returns true when the run should stop early.
  bool record(std::uint64_t round, double sup_error, double mean_error, double disagreement,
              std::uint64_t cum_bits, const ValueTable* table) {
    report_.rounds.push_back({round, sup_error, mean_error, disagreement, cum_bits});
    if (options_.record_history && table != nullptr) report_.history.push_back(*table);
    if (options_.target && !report_.rounds_to_target && sup_error <= *options_.target) {
      report_.rounds_to_target = round;
    }
    return options_.stop_at_target && report_.rounds_to_target.has_value();
  }

  void finish() {
    report_.budget_exceeded = options_.target.has_value() && !report_.rounds_to_target;
  }

 private:
  RunReport& report_;
  const RunOptions& options_;
};

/// Local state of one SDBP machine: values of owned states plus cached
/// boundary values it consumes, kept in one sorted slot array.
class SdbpMachine {
 public:
  SdbpMachine(MachineId id, const ShardedDataset& data, const DepGraph& g) : id_(id) {
    const auto owned = data.owned_states(id);
    owned_.assign(owned.begin(), owned.end());
    known_ = owned_;
    for (MachineId k : g.neighbors(id)) {
      const auto b = g.boundary(id, k);
      known_.insert(known_.end(), b.begin(), b.end());
    }
    std::sort(known_.begin(), known_.end());
    known_.erase(std::unique(known_.begin(), known_.end()), known_.end());
    values_.assign(known_.size(), 0.0);
    stamps_.assign(known_.size(), 0);
    for (StateId s : owned_) owned_slot_.push_back(slot(s));
  }

  MachineId id() const noexcept { return id_; }
  const std::vector<StateId>& owned() const noexcept { return owned_; }
  std::size_t stored_values() const noexcept { return known_.size(); }

  double value(StateId s) const { return values_[slot(s)]; }

  /// Stores a received boundary value; older sends (by stamp) are ignored.
  void receive(StateId s, double v, std::uint64_t stamp = 0) {
    const std::size_t i = slot(s);
    if (stamp + 1 < stamps_[i]) return;
    values_[i] = v;
    stamps_[i] = stamp + 1;
  }

  /// Jacobi backup of every owned state, repeated 1 + extra_sweeps times.
  void local_step(const Mdp& mdp, const DeltaNoise& noise, std::uint64_t round,
                  std::size_t extra_sweeps) {
    std::vector<double> next(owned_.size());
    auto lookup = [this](StateId s) { return value(s); };
    for (std::size_t sweep = 0; sweep <= extra_sweeps; ++sweep) {
      for (std::size_t i = 0; i < owned_.size(); ++i) {
        next[i] = backup_state(mdp, owned_[i], lookup);
        if (noise.active()) next[i] += noise.offset(id_, round, owned_[i]);
      }
      for (std::size_t i = 0; i < owned_.size(); ++i) values_[owned_slot_[i]] = next[i];
    }
  }

  std::vector<double> owned_values() const {
    std::vector<double> out;
    out.reserve(owned_.size());
    for (std::size_t i : owned_slot_) out.push_back(values_[i]);
    return out;
  }

  void write_owned(ValueTable& global) const {
    for (std::size_t i = 0; i < owned_.size(); ++i) global[owned_[i]] = values_[owned_slot_[i]];
  }

 private:
  std::size_t slot(StateId s) const {
    auto it = std::lower_bound(known_.begin(), known_.end(), s);
    if (it == known_.end() || *it != s) {
      throw ContractViolation("SDBP machine asked for a value it neither owns nor receives");
    }
    return static_cast<std::size_t>(it - known_.begin());
  }

  MachineId id_;
  std::vector<StateId> owned_;
  std::vector<StateId> known_;
  std::vector<double> values_;
  std::vector<std::uint64_t> stamps_;
  std::vector<std::size_t> owned_slot_;
};

inline std::vector<SdbpMachine> make_sdbp_machines(const ShardedDataset& data, const DepGraph& g) {
  std::vector<SdbpMachine> machines;
  machines.reserve(data.n_machines());
  for (MachineId j = 0; j < data.n_machines(); ++j) machines.emplace_back(j, data, g);
  return machines;
}

inline void check_inputs(const Mdp& mdp, const ShardedDataset& data, const DepGraph& g) {
  data.check_consistent(mdp);
  if (g.n_machines() != data.n_machines()) {
    throw ContractViolation("dependency graph and dataset disagree on machine count");
  }
}

inline RunMeta base_meta(const std::string& algorithm, const Mdp& mdp, const ShardedDataset& data,
                         const DeltaNoise& noise, const RunOptions& options) {
  RunMeta meta;
  meta.algorithm = algorithm;
  meta.topology = options.topology_label;
  meta.machines = data.n_machines();
  meta.gamma = mdp.gamma();
  meta.epsilon = options.target;
  meta.delta = noise.active() ? noise.delta : 0.0;
  return meta;
}

}  // namespace dpsim::detail

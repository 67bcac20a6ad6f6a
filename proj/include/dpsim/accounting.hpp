#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpsim/mdp.hpp"

namespace dpsim {

/// Value as it enters a transcript digest: rounded to 12 decimal places.
std::int64_t quantize_value(double v);

/// Per-machine, per-round digests of received payloads and output values,
/// plus a running digest of everything that crossed each undirected edge.
class TranscriptLog {
 public:
  TranscriptLog() = default;
  explicit TranscriptLog(std::size_t n_machines);

  std::size_t n_machines() const noexcept { return current_.size(); }

  void absorb_message(MachineId receiver, MachineId sender, std::uint64_t round,
                      std::span<const std::pair<StateId, double>> payload);
  /// Opaque payloads (e.g. forwarded shard data) enter through their digest.
  void absorb_opaque(MachineId receiver, MachineId sender, std::uint64_t round,
                     std::uint64_t payload_digest);
  void absorb_outputs(MachineId machine, std::span<const double> values);
  void close_round();

  /// Digest stream of machine j: entry t covers round t.
  const std::vector<std::uint64_t>& digests(MachineId j) const { return rounds_[j]; }
  /// Digest of every message that crossed {a, b}, in either direction.
  std::uint64_t edge_digest(MachineId a, MachineId b) const;

  bool operator==(const TranscriptLog&) const = default;

 private:
  std::vector<std::uint64_t> current_;
  std::vector<std::vector<std::uint64_t>> rounds_;
  std::map<std::pair<MachineId, MachineId>, std::uint64_t> edges_;
};

/// Exact per-edge bit counts.
class BitLedger {
 public:
  void record(MachineId from, MachineId to, std::uint64_t bits);
  void close_round();

  std::uint64_t edge_bits(MachineId from, MachineId to) const;
  std::uint64_t undirected_edge_bits(MachineId a, MachineId b) const;
  std::uint64_t total() const noexcept { return total_; }
  /// Cumulative total after each closed round.
  const std::vector<std::uint64_t>& cumulative_by_round() const noexcept { return cumulative_; }
  /// Largest number of bits any directed edge carried in one round.
  std::uint64_t max_edge_bits_per_round() const noexcept { return max_round_edge_; }
  /// Bits on edges with exactly one endpoint in `side`.
  std::uint64_t cut_bits(const std::vector<bool>& side) const;
  const std::map<std::pair<MachineId, MachineId>, std::uint64_t>& edges() const noexcept {
    return edges_;
  }

  /// Reduce step for merging ledgers of separate runs.
  void merge(const BitLedger& other);

 private:
  std::map<std::pair<MachineId, MachineId>, std::uint64_t> edges_;
  std::map<std::pair<MachineId, MachineId>, std::uint64_t> round_edges_;
  std::vector<std::uint64_t> cumulative_;
  std::uint64_t total_ = 0;
  std::uint64_t max_round_edge_ = 0;
};

}  // namespace dpsim

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dpsim/accounting.hpp"
#include "dpsim/depgraph.hpp"

namespace dpsim {

using ValueEntry = std::pair<StateId, double>;

struct Message {
  MachineId sender;
  MachineId receiver;
  std::vector<ValueEntry> payload;
  std::uint64_t bit_size;
};

struct NetworkRound {
  std::uint64_t round = 0;
  std::vector<Message> messages;
};

/// Synchronous message layer over the undirected support of a DepGraph.
///
/// Messages sent during a round are delivered at the end of the send phase
/// of that round; every send is charged payload length x value width bits.
class SimNetwork {
 public:
  SimNetwork(const DepGraph& g, unsigned value_width, bool record_transcripts);

  void begin_round(std::uint64_t round);
  void send(MachineId from, MachineId to, std::vector<ValueEntry> payload);
  /// Count-only send for bulk payloads whose contents are not digested.
  void send_counted(MachineId from, MachineId to, std::size_t n_values);
  void send_opaque(MachineId from, MachineId to, std::uint64_t bits, std::uint64_t digest);

  /// Messages addressed to j in the current round, in sender order.
  std::vector<const Message*> inbox(MachineId j) const;
  void end_round();

  unsigned value_width() const noexcept { return value_width_; }
  std::uint64_t round() const noexcept { return round_; }
  const NetworkRound& current() const noexcept { return current_; }
  TranscriptLog& transcripts() noexcept { return transcripts_; }
  BitLedger& ledger() noexcept { return ledger_; }
  bool recording() const noexcept { return record_; }

 private:
  void check_link(MachineId from, MachineId to) const;

  const DepGraph* graph_;
  unsigned value_width_;
  bool record_;
  std::uint64_t round_ = 0;
  NetworkRound current_;
  TranscriptLog transcripts_;
  BitLedger ledger_;
};

}  // namespace dpsim

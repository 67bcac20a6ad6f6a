#include "dpsim/network.hpp"

#include <fmt/format.h>

namespace dpsim {

SimNetwork::SimNetwork(const DepGraph& g, unsigned value_width, bool record_transcripts)
    : graph_(&g),
      value_width_(value_width),
      record_(record_transcripts),
      transcripts_(g.n_machines()) {
  if (value_width_ == 0) throw ContractViolation("SimNetwork: value width must be positive");
}

void SimNetwork::begin_round(std::uint64_t round) {
  round_ = round;
  current_.round = round;
  current_.messages.clear();
}

void SimNetwork::check_link(MachineId from, MachineId to) const {
  if (from >= graph_->n_machines() || to >= graph_->n_machines() || !graph_->adjacent(from, to)) {
    throw ContractViolation(
        fmt::format("message {} -> {} does not follow a support-graph edge", from, to));
  }
}

void SimNetwork::send(MachineId from, MachineId to, std::vector<ValueEntry> payload) {
  check_link(from, to);
  const std::uint64_t bits = static_cast<std::uint64_t>(payload.size()) * value_width_;
  ledger_.record(from, to, bits);
  if (record_) transcripts_.absorb_message(to, from, round_, payload);
  current_.messages.push_back({from, to, std::move(payload), bits});
}

void SimNetwork::send_counted(MachineId from, MachineId to, std::size_t n_values) {
  check_link(from, to);
  ledger_.record(from, to, static_cast<std::uint64_t>(n_values) * value_width_);
}

void SimNetwork::send_opaque(MachineId from, MachineId to, std::uint64_t bits,
                             std::uint64_t digest) {
  check_link(from, to);
  ledger_.record(from, to, bits);
  if (record_) transcripts_.absorb_opaque(to, from, round_, digest);
}

std::vector<const Message*> SimNetwork::inbox(MachineId j) const {
  std::vector<const Message*> out;
  for (const auto& m : current_.messages) {
    if (m.receiver == j) out.push_back(&m);
  }
  return out;
}

void SimNetwork::end_round() {
  ledger_.close_round();
  if (record_) transcripts_.close_round();
}

}  // namespace dpsim

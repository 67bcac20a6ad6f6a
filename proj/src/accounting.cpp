#include "dpsim/accounting.hpp"

#include <algorithm>
#include <cmath>

#include "detail/mix.hpp"

namespace dpsim {

std::int64_t quantize_value(double v) { return std::llround(v * 1e12); }

TranscriptLog::TranscriptLog(std::size_t n_machines)
    : current_(n_machines, 0), rounds_(n_machines) {}

namespace {

std::uint64_t fold(std::uint64_t h, std::uint64_t x) { return detail::mix64(h ^ detail::mix64(x)); }

std::uint64_t payload_digest(std::span<const std::pair<StateId, double>> payload) {
  std::uint64_t h = detail::mix64(payload.size());
  for (const auto& [s, v] : payload) {
    h = fold(h, s);
    h = fold(h, static_cast<std::uint64_t>(quantize_value(v)));
  }
  return h;
}

}  // namespace

void TranscriptLog::absorb_message(MachineId receiver, MachineId sender, std::uint64_t round,
                                   std::span<const std::pair<StateId, double>> payload) {
  absorb_opaque(receiver, sender, round, payload_digest(payload));
}

void TranscriptLog::absorb_opaque(MachineId receiver, MachineId sender, std::uint64_t round,
                                  std::uint64_t digest) {
  const std::uint64_t msg = detail::mix_keys({sender, round, digest});
  current_[receiver] = fold(current_[receiver], msg);
  auto& edge = edges_[{std::min(sender, receiver), std::max(sender, receiver)}];
  edge = fold(edge, detail::mix_keys({sender, receiver, round, digest}));
}

void TranscriptLog::absorb_outputs(MachineId machine, std::span<const double> values) {
  std::uint64_t h = detail::mix64(values.size());
  for (double v : values) h = fold(h, static_cast<std::uint64_t>(quantize_value(v)));
  current_[machine] = fold(current_[machine], h);
}

void TranscriptLog::close_round() {
  for (std::size_t j = 0; j < current_.size(); ++j) {
    rounds_[j].push_back(current_[j]);
    current_[j] = 0;
  }
}

std::uint64_t TranscriptLog::edge_digest(MachineId a, MachineId b) const {
  auto it = edges_.find({std::min(a, b), std::max(a, b)});
  return it == edges_.end() ? 0 : it->second;
}

void BitLedger::record(MachineId from, MachineId to, std::uint64_t bits) {
  edges_[{from, to}] += bits;
  round_edges_[{from, to}] += bits;
  total_ += bits;
}

void BitLedger::close_round() {
  for (const auto& [edge, bits] : round_edges_) max_round_edge_ = std::max(max_round_edge_, bits);
  round_edges_.clear();
  cumulative_.push_back(total_);
}

std::uint64_t BitLedger::edge_bits(MachineId from, MachineId to) const {
  auto it = edges_.find({from, to});
  return it == edges_.end() ? 0 : it->second;
}

std::uint64_t BitLedger::undirected_edge_bits(MachineId a, MachineId b) const {
  return edge_bits(a, b) + edge_bits(b, a);
}

std::uint64_t BitLedger::cut_bits(const std::vector<bool>& side) const {
  std::uint64_t total = 0;
  for (const auto& [edge, bits] : edges_) {
    if (side.at(edge.first) != side.at(edge.second)) total += bits;
  }
  return total;
}

void BitLedger::merge(const BitLedger& other) {
  for (const auto& [edge, bits] : other.edges_) edges_[edge] += bits;
  total_ += other.total_;
  max_round_edge_ = std::max(max_round_edge_, other.max_round_edge_);
}

}  // namespace dpsim

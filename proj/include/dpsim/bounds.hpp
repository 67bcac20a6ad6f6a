#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpsim/instances.hpp"
#include "dpsim/protocols.hpp"

namespace dpsim {
/// Absolute floating-point allowance when checking an inequality. Rows measured
/// against the solved V* additionally allow 2 * kOracleTolerance.
/// Absolute floating-point allowance when checking an inequality.
inline constexpr double kBoundSlackTolerance = 1e-12;

enum class BoundKind {
  thm5_direct,
  thm7_async,
  thm8_gossip,
  gossip_recursion,
  gossip_contraction,
  thm1_rounds,
  thm2_bits,
};

std::string to_string(BoundKind kind);
BoundKind bound_from_string(const std::string& s);

struct BoundParams {
  /// Gossip: use the configured delta instead of the measured delta_eff.
  bool configured_delta = false;
  /// thm2_bits: chain count m and depth L.
  std::size_t width = 0;
  std::size_t depth = 0;
};

struct VerdictRow {
  std::uint64_t round = 0;
  std::string quantity;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
};

struct VerdictTable {
  std::string bound;
  std::vector<VerdictRow> rows;
  bool all_satisfied = true;
  std::size_t violations = 0;
  double min_slack = 0.0;
  double mean_slack = 0.0;
  std::string note;

  std::string to_markdown(std::size_t max_rows = 20) const;
  std::string to_json() const;
};

/// Checks the closed-form bound against every recorded round of `report`.
/// Throws ContractViolation when the report lacks a series the bound needs.
VerdictTable compare_bounds(const RunReport& report, BoundKind bound, const BoundParams& params = {});

struct BitLowerboundReport {
  std::size_t depth = 0;
  std::size_t width = 0;
  std::size_t rounds = 0;
  std::size_t instances = 0;
  /// Distinct transcripts per cut edge along the path, edge r = (path[r], path[r+1]).
  std::vector<std::size_t> distinct_per_edge;
  bool all_distinct = false;
  /// Every instance decoded correctly by thresholding at gamma^L / 2.
  bool correct = false;
  std::vector<std::size_t> incorrect_instances;
  std::uint64_t min_total_bits = 0;
  std::uint64_t min_cut_bits = 0;
  /// Information floor m * L, in distinguishability units.
  std::uint64_t floor_units = 0;

  std::string to_markdown() const;
};

struct BitProtocol {
  ProtocolKind kind = ProtocolKind::sdbp;
  /// Randomized wrapper: fixed per-run seed for SDBP payload shuffling.
  std::optional<std::uint64_t> shuffle_seed;
  unsigned value_width = 64;
};

/// Rounds sufficient for SDBP to decode every chain: L + ceil(log 4 / log(1/gamma)) + 1.
std::size_t decode_horizon(std::size_t depth, double gamma);

/// Runs `protocol` on every member of a gen_thm2_all family.
BitLowerboundReport verify_bit_lowerbound(const HardInstance& family, const BitProtocol& protocol);

/// First round t whose history has probe values nonzero exactly where b is
/// set. Needs a report with record_history.
std::optional<std::uint64_t> decode_round(const RunReport& report, const HardInstance& instance,
                                          std::size_t member = 0);

}  // namespace dpsim

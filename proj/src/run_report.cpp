#include <map>

#include <fmt/format.h>
#include <json.hpp>

#include "dpsim/protocols.hpp"

namespace dpsim {

std::string report_csv(const RunReport& report) {
  const bool batched = !report.batches.empty();
  std::map<std::uint64_t, std::uint64_t> batch_at;
  for (const auto& b : report.batches) batch_at[b.round] = b.batch;
  std::string out = "round,sup_error,mean_error,disagreement,cum_bits_total";
  out += batched ? ",batch\n" : "\n";
  for (const auto& r : report.rounds) {
    out += fmt::format("{},{:.17g},{:.17g},{:.17g},{}", r.round, r.sup_error, r.mean_error,
                       r.disagreement, r.cum_bits_total);
    if (batched) {
      auto it = batch_at.find(r.round);
      out += it == batch_at.end() ? std::string(",") : fmt::format(",{}", it->second);
    }
    out += '\n';
  }
  return out;
}

std::string report_summary_json(const RunReport& report) {
  nlohmann::ordered_json j;
  const auto& m = report.meta;
  j["algorithm"] = m.algorithm;
  j["topology"] = m.topology;
  j["M"] = m.machines;
  j["gamma"] = m.gamma;
  j["epsilon"] = m.epsilon ? nlohmann::ordered_json(*m.epsilon) : nlohmann::ordered_json(nullptr);
  j["delta"] = m.delta;
  j["gap"] = m.gap;
  j["phi"] = m.phi;
  j["rounds_to_target"] = report.rounds_to_target
                              ? nlohmann::ordered_json(*report.rounds_to_target)
                              : nlohmann::ordered_json(nullptr);
  j["budget_exceeded"] = report.budget_exceeded;
  if (m.delay != 1) j["delay"] = m.delay;
  return j.dump(2) + "\n";
}

}  // namespace dpsim

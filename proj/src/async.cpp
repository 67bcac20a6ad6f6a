#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "detail/mix.hpp"
#include "detail/run_common.hpp"
#include "dpsim/async.hpp"
#include "dpsim/network.hpp"

namespace dpsim {

std::string to_string(DelayMode mode) {
  switch (mode) {
    case DelayMode::adversarial_max: return "adversarial_max";
    case DelayMode::uniform_random: return "uniform_random";
    case DelayMode::per_edge_fixed: return "per_edge_fixed";
  }
  return "unknown";
}

DelayMode delay_mode_from_string(const std::string& s) {
  if (s == "adversarial_max") return DelayMode::adversarial_max;
  if (s == "uniform_random") return DelayMode::uniform_random;
  if (s == "per_edge_fixed") return DelayMode::per_edge_fixed;
  throw ContractViolation(fmt::format("unknown delay mode '{}'", s));
}

DelaySchedule::DelaySchedule(DelayMode mode, std::uint64_t d, std::uint64_t seed,
                             std::uint64_t cadence, bool partial_batch_updates)
    : mode_(mode), d_(d), seed_(seed), cadence_(cadence), partial_(partial_batch_updates) {
  if (d_ < 1) throw ContractViolation("delay bound D must be at least 1");
  if (cadence_ < 1 || cadence_ > d_) {
    throw ContractViolation(fmt::format("update cadence {} must lie in [1, D={}]", cadence_, d_));
  }
}

std::uint64_t DelaySchedule::delay(MachineId from, MachineId to, std::uint64_t round) const {
  switch (mode_) {
    case DelayMode::adversarial_max: return d_ - 1;
    case DelayMode::uniform_random: return detail::mix_keys({seed_, from, to, round}) % d_;
    case DelayMode::per_edge_fixed: return detail::mix_keys({seed_, from, to}) % d_;
  }
  return d_ - 1;
}

bool DelaySchedule::updates(MachineId, std::uint64_t round) const {
  if (mode_ == DelayMode::adversarial_max && !partial_) return round % d_ == d_ - 1;
  return round % cadence_ == cadence_ - 1;
}

namespace {

struct InFlight {
  MachineId sender;
  MachineId receiver;
  std::uint64_t sent;
  std::uint64_t deliver;
  std::vector<ValueEntry> payload;
};

}  // namespace

RunReport run_async_sdbp(const Mdp& mdp, const ShardedDataset& data, const DepGraph& g,
                         const DeltaNoise& noise, const DelaySchedule& schedule,
                         const RunOptions& options) {
  noise.validate();
  detail::check_inputs(mdp, data, g);
  const ValueTable vstar = detail::reference_values(mdp, options);
  const std::uint64_t d = schedule.d();

  RunReport report;
  report.meta = detail::base_meta("async_sdbp", mdp, data, noise, options);
  report.meta.diameter = g.diameter();
  report.meta.delay = d;

  auto machines = detail::make_sdbp_machines(data, g);
  SimNetwork net(g, options.value_width, options.record_transcripts);
  detail::TraceRecorder recorder(report, options);
  std::vector<InFlight> buffer;

  auto assemble = [&]() {
    ValueTable global(mdp.n_states());
    for (const auto& m : machines) m.write_owned(global);
    return global;
  };
  auto snapshot = [&](std::uint64_t rounds_done, const ValueTable& global, double err) {
    if (rounds_done % d == 0) report.batches.push_back({rounds_done / d, rounds_done, global, err});
  };

  ValueTable global(mdp.n_states());
  double err = sup_distance(global, vstar);
  snapshot(0, global, err);
  bool stop = recorder.record(0, err, err, 0.0, 0, &global);
  for (std::uint64_t t = 0; t < options.rounds && !stop; ++t) {
    net.begin_round(t);
    for (auto& m : machines) {
      const MachineId j = m.id();
      for (MachineId k : g.neighbors(j)) {
        const auto b = g.boundary(k, j);
        if (b.empty()) continue;
        std::vector<ValueEntry> payload;
        payload.reserve(b.size());
        for (StateId s : b) payload.emplace_back(s, m.value(s));
        buffer.push_back({j, k, t, t + schedule.delay(j, k, t), payload});
        net.send(j, k, std::move(payload));
      }
    }
    auto due = std::stable_partition(buffer.begin(), buffer.end(),
                                     [t](const InFlight& f) { return f.deliver > t; });
    std::vector<InFlight> ready(std::make_move_iterator(due), std::make_move_iterator(buffer.end()));
    buffer.erase(due, buffer.end());
    std::stable_sort(ready.begin(), ready.end(), [](const InFlight& a, const InFlight& b) {
      return a.sent != b.sent ? a.sent < b.sent : a.sender < b.sender;
    });
    for (const auto& f : ready) {
      if (f.deliver - f.sent > d - 1) {
        throw ContractViolation(fmt::format("message {}->{} held {} rounds, above D - 1 = {}",
                                            f.sender, f.receiver, f.deliver - f.sent, d - 1));
      }
      for (const auto& [s, v] : f.payload) machines[f.receiver].receive(s, v, f.sent);
    }
    for (auto& m : machines) {
      if (schedule.updates(m.id(), t)) m.local_step(mdp, noise, t, options.extra_local_sweeps);
    }
    if (net.recording()) {
      for (const auto& m : machines) net.transcripts().absorb_outputs(m.id(), m.owned_values());
    }
    net.end_round();
    global = assemble();
    err = sup_distance(global, vstar);
    snapshot(t + 1, global, err);
    stop = recorder.record(t + 1, err, err, 0.0, net.ledger().total(), &global);
  }
  recorder.finish();
  report.final_values = std::move(global);
  for (const auto& m : machines) report.machine_outputs.push_back(m.owned_values());
  report.bits = net.ledger();
  report.transcripts = net.transcripts();
  return report;
}

LightconeVerdict batch_lightcone_check(const Mdp& mdp, const ShardedDataset& data,
                                       const DepGraph& g, const DeltaNoise& noise,
                                       const DelaySchedule& schedule, MachineId j,
                                       std::uint64_t batch, std::optional<std::size_t> min_distance) {
  const std::size_t cut = min_distance.value_or(batch + 1);
  std::vector<double> rewards = mdp.rewards();
  LightconeVerdict verdict;
  for (MachineId k = 0; k < data.n_machines(); ++k) {
    const std::size_t dist = g.distance(j, k);
    if (dist != kUnreachable && dist < cut) continue;
    ++verdict.perturbed_machines;
    for (StateId s : data.owned_states(k)) {
      for (ActionId a = 0; a < mdp.n_actions(); ++a) {
        auto& r = rewards[s * mdp.n_actions() + a];
        r = 1.0 - r;
      }
    }
  }
  const Mdp perturbed = mdp.with_rewards(rewards);
  const auto data_p = ShardedDataset::from_mdp(perturbed, data.ownership(), data.n_machines());

  RunOptions opt;
  opt.rounds = batch * schedule.d();
  opt.vstar = ValueTable(mdp.n_states());
  const RunReport base = run_async_sdbp(mdp, data, g, noise, schedule, opt);
  const RunReport alt = run_async_sdbp(perturbed, data_p, g, noise, schedule, opt);
  const auto& va = base.batches.at(batch).values;
  const auto& vb = alt.batches.at(batch).values;
  StateId witness = 0;
  bool identical = true;
  for (StateId s : data.owned_states(j)) {
    const double gap = std::abs(va[s] - vb[s]);
    if (va[s] != vb[s] && identical) {
      identical = false;
      witness = s;
    }
    verdict.max_gap = std::max(verdict.max_gap, gap);
  }
  verdict.pass = identical;
  verdict.detail =
      identical ? fmt::format("machine {} batch {} unchanged with {} machines at distance >= {} perturbed",
                              j, batch, verdict.perturbed_machines, cut)
                : fmt::format("machine {} batch {} moved at state {} by {:.6g} (perturbed distance >= {})",
                              j, batch, witness, verdict.max_gap, cut);
  return verdict;
}

std::uint64_t async_round_bound(double gamma, double epsilon, std::uint64_t d) {
  if (d < 1) throw ContractViolation("delay bound D must be at least 1");
  return d * discounted_radius(gamma, epsilon);
}

}  // namespace dpsim

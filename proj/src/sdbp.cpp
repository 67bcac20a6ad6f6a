#include <algorithm>
#include <deque>
#include <map>
#include <random>

#include <fmt/format.h>

#include "detail/run_common.hpp"
#include "dpsim/network.hpp"
#include "dpsim/protocols.hpp"

namespace dpsim {

namespace {

ValueTable assemble(const std::vector<detail::SdbpMachine>& machines, std::size_t n_states) {
  ValueTable global(n_states);
  for (const auto& m : machines) m.write_owned(global);
  return global;
}

// Shared skeleton: `communicate(t, machines, net)` performs the send phase,
// delivery happens here, then every machine takes its local step.
template <typename Communicate>
RunReport run_direct(const std::string& algorithm, const Mdp& mdp, const ShardedDataset& data,
                     const DepGraph& g, const DeltaNoise& noise, const RunOptions& options,
                     Communicate&& communicate) {
  noise.validate();
  detail::check_inputs(mdp, data, g);
  const ValueTable vstar = detail::reference_values(mdp, options);

  RunReport report;
  report.meta = detail::base_meta(algorithm, mdp, data, noise, options);
  report.meta.diameter = g.diameter();

  auto machines = detail::make_sdbp_machines(data, g);
  SimNetwork net(g, options.value_width, options.record_transcripts);
  detail::TraceRecorder recorder(report, options);

  ValueTable global(mdp.n_states());
  double err = sup_distance(global, vstar);
  bool stop = recorder.record(0, err, err, 0.0, 0, &global);
  for (std::uint64_t t = 0; t < options.rounds && !stop; ++t) {
    net.begin_round(t);
    communicate(t, machines, net);
    for (const Message& msg : net.current().messages) {
      for (const auto& [s, v] : msg.payload) machines[msg.receiver].receive(s, v);
    }
    for (auto& m : machines) m.local_step(mdp, noise, t, options.extra_local_sweeps);
    if (net.recording()) {
      for (const auto& m : machines) net.transcripts().absorb_outputs(m.id(), m.owned_values());
    }
    net.end_round();
    global = assemble(machines, mdp.n_states());
    err = sup_distance(global, vstar);
    stop = recorder.record(t + 1, err, err, 0.0, net.ledger().total(), &global);
  }
  recorder.finish();
  report.final_values = std::move(global);
  for (const auto& m : machines) report.machine_outputs.push_back(m.owned_values());
  report.bits = net.ledger();
  report.transcripts = net.transcripts();
  return report;
}

}  // namespace

RunReport run_sdbp(const Mdp& mdp, const ShardedDataset& data, const DepGraph& g,
                   const DeltaNoise& noise, const RunOptions& options) {
  auto communicate = [&](std::uint64_t t, const std::vector<detail::SdbpMachine>& machines,
                         SimNetwork& net) {
    for (const auto& sender : machines) {
      const MachineId j = sender.id();
      for (MachineId k : g.neighbors(j)) {
        const auto needed = g.boundary(k, j);
        if (needed.empty()) continue;
        std::vector<ValueEntry> payload;
        payload.reserve(needed.size());
        for (StateId s : needed) payload.emplace_back(s, sender.value(s));
        if (options.shuffle_seed) {
          std::seed_seq seq{*options.shuffle_seed, t, std::uint64_t{j}, std::uint64_t{k}};
          std::mt19937_64 rng(seq);
          std::shuffle(payload.begin(), payload.end(), rng);
        }
        net.send(j, k, std::move(payload));
      }
    }
  };
  return run_direct("sdbp", mdp, data, g, noise, options, communicate);
}

RunReport run_sdbp_bandwidth(const Mdp& mdp, const ShardedDataset& data, const DepGraph& g,
                             const DeltaNoise& noise, std::optional<std::uint64_t> bandwidth_bits,
                             const RunOptions& options) {
  std::optional<std::size_t> per_round;
  if (bandwidth_bits) {
    if (*bandwidth_bits < options.value_width) {
      throw ContractViolation(fmt::format("bandwidth {} bits cannot carry one {}-bit value",
                                          *bandwidth_bits, options.value_width));
    }
    per_round = static_cast<std::size_t>(*bandwidth_bits / options.value_width);
  }

  struct EdgeQueue {
    std::deque<StateId> order;
    std::map<StateId, double> pending;
    std::map<StateId, double> last_enqueued;  // receiver starts from 0
  };
  std::map<std::pair<MachineId, MachineId>, EdgeQueue> queues;

  auto communicate = [&](std::uint64_t, const std::vector<detail::SdbpMachine>& machines,
                         SimNetwork& net) {
    for (const auto& sender : machines) {
      const MachineId j = sender.id();
      for (MachineId k : g.neighbors(j)) {
        const auto needed = g.boundary(k, j);
        if (needed.empty()) continue;
        EdgeQueue& q = queues[{j, k}];
        for (StateId s : needed) {
          const double v = sender.value(s);
          auto [last, inserted] = q.last_enqueued.try_emplace(s, 0.0);
          if (last->second == v) continue;
          last->second = v;
          auto [slot, fresh] = q.pending.try_emplace(s, v);
          if (fresh) {
            q.order.push_back(s);
          } else {
            slot->second = v;
          }
        }
        if (q.order.empty()) continue;
        const std::size_t n = per_round ? std::min(*per_round, q.order.size()) : q.order.size();
        std::vector<ValueEntry> payload;
        payload.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
          const StateId s = q.order.front();
          q.order.pop_front();
          payload.emplace_back(s, q.pending.at(s));
          q.pending.erase(s);
        }
        net.send(j, k, std::move(payload));
      }
    }
  };
  auto report = run_direct("sdbp_bandwidth", mdp, data, g, noise, options, communicate);
  return report;
}

}  // namespace dpsim

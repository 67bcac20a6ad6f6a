#include <algorithm>
#include <cmath>
#include <vector>

#include "detail/mix.hpp"
#include "detail/run_common.hpp"
#include "dpsim/network.hpp"
#include "dpsim/protocols.hpp"

namespace dpsim {

namespace {

std::uint64_t shard_digest(MachineId j, std::span<const DataTransition> shard) {
  std::uint64_t h = detail::mix_keys({0xf100dULL, j});
  for (const auto& tr : shard) {
    h = detail::mix_keys({h, tr.state, tr.action, tr.next,
                          static_cast<std::uint64_t>(quantize_value(tr.reward))});
  }
  return h;
}

// Value iteration on the states of the known machines; successors owned by
// unknown machines keep the initialization value 0.
std::vector<double> solve_known(const Mdp& mdp, const ShardedDataset& data,
                                const std::vector<bool>& known) {
  std::vector<StateId> region;
  for (MachineId k = 0; k < data.n_machines(); ++k) {
    if (!known[k]) continue;
    for (StateId s : data.owned_states(k)) region.push_back(s);
  }
  std::sort(region.begin(), region.end());
  std::vector<double> v(mdp.n_states(), 0.0), next(region.size());
  auto lookup = [&v](StateId s) { return v[s]; };
  const double stop = 1e-13 * (1.0 - mdp.gamma()) / mdp.gamma();
  for (;;) {
    double step = 0.0;
    for (std::size_t i = 0; i < region.size(); ++i) next[i] = backup_state(mdp, region[i], lookup);
    for (std::size_t i = 0; i < region.size(); ++i) {
      step = std::max(step, std::abs(next[i] - v[region[i]]));
      v[region[i]] = next[i];
    }
    if (step <= stop) break;
  }
  return v;
}

}  // namespace

RunReport run_flood(const Mdp& mdp, const ShardedDataset& data, const DepGraph& g,
                    const RunOptions& options) {
  detail::check_inputs(mdp, data, g);
  const ValueTable vstar = detail::reference_values(mdp, options);
  const std::size_t m = data.n_machines();

  RunReport report;
  report.meta = detail::base_meta("flood", mdp, data, DeltaNoise::none(), options);
  report.meta.diameter = g.diameter();

  std::vector<std::uint64_t> digest(m);
  std::vector<std::uint64_t> shard_bits(m);
  for (MachineId j = 0; j < m; ++j) {
    digest[j] = shard_digest(j, data.shard(j));
    shard_bits[j] = data.shard(j).size() * 4ULL * options.value_width;
  }

  std::vector<std::vector<bool>> known(m, std::vector<bool>(m, false));
  for (MachineId j = 0; j < m; ++j) known[j][j] = true;

  SimNetwork net(g, options.value_width, options.record_transcripts);
  detail::TraceRecorder recorder(report, options);

  std::vector<std::vector<double>> outputs(m);
  ValueTable global(mdp.n_states());
  double err = sup_distance(global, vstar);
  bool stop = recorder.record(0, err, err, 0.0, 0, &global);
  for (std::uint64_t t = 0; t < options.rounds && !stop; ++t) {
    net.begin_round(t);
    auto next_known = known;
    for (MachineId j = 0; j < m; ++j) {
      std::uint64_t bits = 0;
      std::uint64_t h = detail::mix_keys({0xf100dULL, j, t});
      for (MachineId k = 0; k < m; ++k) {
        if (!known[j][k]) continue;
        bits += shard_bits[k];
        h = detail::mix_keys({h, k, digest[k]});
      }
      for (MachineId k : g.neighbors(j)) {
        net.send_opaque(j, k, bits, h);
        for (MachineId x = 0; x < m; ++x) {
          if (known[j][x]) next_known[k][x] = true;
        }
      }
    }
    known = std::move(next_known);
    for (MachineId j = 0; j < m; ++j) {
      const auto v = solve_known(mdp, data, known[j]);
      outputs[j].clear();
      for (StateId s : data.owned_states(j)) {
        outputs[j].push_back(v[s]);
        global[s] = v[s];
      }
      if (net.recording()) net.transcripts().absorb_outputs(j, outputs[j]);
    }
    net.end_round();
    err = sup_distance(global, vstar);
    stop = recorder.record(t + 1, err, err, 0.0, net.ledger().total(), &global);
  }
  recorder.finish();
  report.final_values = global;
  for (MachineId j = 0; j < m; ++j) {
    std::vector<double> own;
    for (StateId s : data.owned_states(j)) own.push_back(global[s]);
    report.machine_outputs.push_back(std::move(own));
  }
  report.bits = net.ledger();
  report.transcripts = net.transcripts();
  return report;
}

}  // namespace dpsim

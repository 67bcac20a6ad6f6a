#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "detail/run_common.hpp"
#include "dpsim/network.hpp"
#include "dpsim/protocols.hpp"

namespace dpsim {

namespace {

void check_support(const MixingMatrix& w, const DepGraph& g) {
  if (w.size() != g.n_machines()) {
    throw ContractViolation("mixing matrix size differs from machine count");
  }
  for (MachineId j = 0; j < w.size(); ++j) {
    for (const auto& e : w.row(j)) {
      if (e.col != j && !g.adjacent(j, e.col)) {
        throw ContractViolation(
            fmt::format("mixing matrix weight W({},{}) lies off the support graph", j, e.col));
      }
    }
  }
}

}  // namespace

RunReport run_gossip_fvi(const Mdp& mdp, const ShardedDataset& data, const DepGraph& g,
                         const MixingMatrix& w, const DeltaNoise& noise, const RunOptions& options) {
  noise.validate();
  detail::check_inputs(mdp, data, g);
  check_support(w, g);
  const ValueTable vstar = detail::reference_values(mdp, options);
  const std::size_t m = data.n_machines();
  const std::size_t n = mdp.n_states();

  RunReport report;
  report.meta = detail::base_meta("gossip", mdp, data, noise, options);
  report.meta.diameter = g.diameter();
  report.meta.gap = w.gap();
  if (options.track_recursion) report.gossip.emplace();

  SimNetwork net(g, options.value_width, options.record_transcripts);
  detail::TraceRecorder recorder(report, options);

  // Row-major M x n tables.
  std::vector<double> v(m * n, 0.0), u(m * n, 0.0), mean(n, 0.0);
  auto table = [n](std::vector<double>& x, std::size_t j) { return x.data() + j * n; };

  struct Stats {
    double sup = 0.0, mean_err = 0.0, disagreement = 0.0, disagreement_l2 = 0.0;
  };
  std::vector<double> sq(n, 0.0);
  auto spread_l2 = [&](std::vector<double>& x, const std::vector<double>& centre) {
    std::fill(sq.begin(), sq.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double* row = table(x, j);
      for (std::size_t s = 0; s < n; ++s) sq[s] += (row[s] - centre[s]) * (row[s] - centre[s]);
    }
    return std::sqrt(*std::max_element(sq.begin(), sq.end()));
  };
  auto measure = [&]() {
    Stats st;
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double* row = table(v, j);
      for (std::size_t s = 0; s < n; ++s) mean[s] += row[s];
    }
    for (double& x : mean) x /= static_cast<double>(m);
    for (std::size_t s = 0; s < n; ++s) st.mean_err = std::max(st.mean_err, std::abs(mean[s] - vstar[s]));
    for (std::size_t j = 0; j < m; ++j) {
      const double* row = table(v, j);
      for (std::size_t s = 0; s < n; ++s) {
        st.sup = std::max(st.sup, std::abs(row[s] - vstar[s]));
        st.disagreement = std::max(st.disagreement, std::abs(row[s] - mean[s]));
      }
    }
    if (report.gossip) st.disagreement_l2 = spread_l2(v, mean);
    return st;
  };
  auto mean_table = [&]() { return ValueTable(std::vector<double>(mean.begin(), mean.end())); };

  Stats st = measure();
  if (report.gossip) {
    report.gossip->mean_error.push_back(st.mean_err);
    report.gossip->disagreement.push_back(st.disagreement);
    report.gossip->disagreement_l2.push_back(st.disagreement_l2);
  }
  ValueTable snapshot = mean_table();
  bool stop = recorder.record(0, st.sup, st.mean_err, st.disagreement, 0, &snapshot);

  for (std::uint64_t t = 0; t < options.rounds && !stop; ++t) {
    net.begin_round(t);
    // Local Bellman step.
    double delta_eff = 0.0;
    for (MachineId j = 0; j < m; ++j) {
      const double* vj = table(v, j);
      double* uj = table(u, j);
      std::copy(vj, vj + n, uj);
      auto lookup = [vj](StateId s) { return vj[s]; };
      for (StateId s : data.owned_states(j)) uj[s] = backup_state(mdp, s, lookup);
      if (noise.active()) {
        for (std::size_t s = 0; s < n; ++s) uj[s] += noise.offset(j, t, static_cast<StateId>(s));
      }
      if (report.gossip) {
        for (StateId s = 0; s < n; ++s) {
          delta_eff = std::max(delta_eff, std::abs(uj[s] - backup_state(mdp, s, lookup)));
        }
      }
    }
    if (report.gossip) {
      std::vector<double> ubar(n, 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t s = 0; s < n; ++s) ubar[s] += table(u, j)[s];
      }
      for (double& x : ubar) x /= static_cast<double>(m);
      double spread = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t s = 0; s < n; ++s) spread = std::max(spread, std::abs(table(u, j)[s] - ubar[s]));
      }
      report.gossip->delta_eff.push_back(delta_eff);
      report.gossip->local_disagreement.push_back(spread);
      report.gossip->local_disagreement_l2.push_back(spread_l2(u, ubar));
    }
    // Exchange full tables with neighbours, then mix.
    for (MachineId j = 0; j < m; ++j) {
      for (const auto& e : w.row(j)) {
        if (e.col == j) continue;
        if (net.recording()) {
          std::vector<ValueEntry> payload;
          payload.reserve(n);
          const double* uk = table(u, e.col);
          for (StateId s = 0; s < n; ++s) payload.emplace_back(s, uk[s]);
          net.send(e.col, j, std::move(payload));
        } else {
          net.send_counted(e.col, j, n);
        }
      }
    }
    for (MachineId j = 0; j < m; ++j) {
      double* vj = table(v, j);
      std::fill(vj, vj + n, 0.0);
      for (const auto& e : w.row(j)) {
        const double* uk = table(u, e.col);
        for (std::size_t s = 0; s < n; ++s) vj[s] += e.weight * uk[s];
      }
    }
    if (net.recording()) {
      for (MachineId j = 0; j < m; ++j) {
        net.transcripts().absorb_outputs(j, std::span<const double>(table(v, j), n));
      }
    }
    net.end_round();
    st = measure();
    if (report.gossip) {
      report.gossip->mean_error.push_back(st.mean_err);
      report.gossip->disagreement.push_back(st.disagreement);
      report.gossip->disagreement_l2.push_back(st.disagreement_l2);
    }
    if (options.record_history) snapshot = mean_table();
    stop = recorder.record(t + 1, st.sup, st.mean_err, st.disagreement, net.ledger().total(),
                           &snapshot);
  }
  recorder.finish();
  report.final_values = mean_table();
  for (std::size_t j = 0; j < m; ++j) report.machine_outputs.emplace_back(table(v, j), table(v, j) + n);
  report.bits = net.ledger();
  report.transcripts = net.transcripts();
  return report;
}

}  // namespace dpsim

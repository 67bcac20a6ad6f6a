#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dpsim/protocols.hpp"

namespace dpsim {

std::string to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::sdbp: return "sdbp";
    case ProtocolKind::gossip: return "gossip";
    case ProtocolKind::flood: return "flood";
    case ProtocolKind::broadcast: return "broadcast";
  }
  return "unknown";
}

std::vector<MachineId> differing_machines(const Mdp& a, const Mdp& b,
                                          const std::vector<MachineId>& ownership,
                                          std::size_t n_machines) {
  if (a.n_states() != b.n_states() || a.n_actions() != b.n_actions() ||
      ownership.size() != a.n_states()) {
    throw ContractViolation("instances must share state and action spaces and ownership");
  }
  std::vector<bool> differs(n_machines, false);
  for (StateId s = 0; s < a.n_states(); ++s) {
    for (ActionId act = 0; act < a.n_actions(); ++act) {
      const auto sa = a.successors(s, act);
      const auto sb = b.successors(s, act);
      if (a.reward(s, act) != b.reward(s, act) || !std::equal(sa.begin(), sa.end(), sb.begin(), sb.end())) {
        differs.at(ownership[s]) = true;
      }
    }
  }
  std::vector<MachineId> out;
  for (MachineId j = 0; j < n_machines; ++j) {
    if (differs[j]) out.push_back(j);
  }
  return out;
}

namespace {

RunReport run_protocol(const ProtocolSpec& spec, const Mdp& mdp, const ShardedDataset& data,
                       const DepGraph& g, std::size_t rounds) {
  RunOptions opt;
  opt.rounds = rounds;
  opt.record_transcripts = true;
  opt.extra_local_sweeps = spec.extra_local_sweeps;
  // Error traces are irrelevant here; skip the reference solve.
  opt.vstar = ValueTable(mdp.n_states());
  switch (spec.kind) {
    case ProtocolKind::sdbp: return run_sdbp(mdp, data, g, spec.noise, opt);
    case ProtocolKind::gossip: return run_gossip_fvi(mdp, data, g, mh_matrix(g), spec.noise, opt);
    case ProtocolKind::flood: return run_flood(mdp, data, g, opt);
    case ProtocolKind::broadcast: break;
  }
  throw ContractViolation("broadcast is centralized and has no per-machine transcript");
}

}  // namespace

IndistinguishabilityVerdict indistinguishability_check(const ProtocolSpec& protocol,
                                                       const Mdp& first, const Mdp& second,
                                                       const std::vector<MachineId>& ownership,
                                                       std::size_t n_machines, MachineId u,
                                                       std::size_t rounds, Precondition mode) {
  const auto data_a = ShardedDataset::from_mdp(first, ownership, n_machines);
  const auto data_b = ShardedDataset::from_mdp(second, ownership, n_machines);
  const DepGraph ga = build_depgraph(data_a);
  const DepGraph gb = build_depgraph(data_b);
  if (ga.support_fingerprint() != gb.support_fingerprint()) {
    throw ContractViolation("instances do not share a dependency graph support");
  }
  if (u >= n_machines) throw ContractViolation(fmt::format("machine {} out of range", u));
  std::string witness;
  for (MachineId j : differing_machines(first, second, ownership, n_machines)) {
    const std::size_t d = ga.distance(u, j);
    if (d != kUnreachable && d <= rounds) {
      witness = fmt::format("instances differ on machine {} at distance {} <= R = {} from machine {}",
                            j, d, rounds, u);
      if (mode == Precondition::enforce) throw ContractViolation(witness);
      break;
    }
  }

  const RunReport ra = run_protocol(protocol, first, data_a, ga, rounds);
  const RunReport rb = run_protocol(protocol, second, data_b, gb, rounds);

  IndistinguishabilityVerdict verdict;
  const auto& da = ra.transcripts.digests(u);
  const auto& db = rb.transcripts.digests(u);
  for (std::size_t t = 0; t < std::min(da.size(), db.size()); ++t) {
    if (da[t] != db[t]) {
      verdict.first_divergence_round = t;
      break;
    }
  }
  if (!verdict.first_divergence_round && da.size() != db.size()) {
    verdict.first_divergence_round = std::min(da.size(), db.size());
  }
  const auto& oa = ra.machine_outputs.at(u);
  const auto& ob = rb.machine_outputs.at(u);
  bool identical = oa.size() == ob.size();
  for (std::size_t i = 0; identical && i < oa.size(); ++i) {
    verdict.output_gap = std::max(verdict.output_gap, std::abs(oa[i] - ob[i]));
    identical = oa[i] == ob[i];
  }
  for (std::size_t i = 0; i < std::min(oa.size(), ob.size()); ++i) {
    verdict.output_gap = std::max(verdict.output_gap, std::abs(oa[i] - ob[i]));
  }
  verdict.pass = identical && !verdict.first_divergence_round;
  verdict.detail = verdict.pass
                       ? fmt::format("{}: transcript and outputs at machine {} identical after {} rounds",
                                     to_string(protocol.kind), u, rounds)
                       : fmt::format("{}: machine {} diverges (first round {}, output gap {:.6g})",
                                     to_string(protocol.kind), u,
                                     verdict.first_divergence_round
                                         ? fmt::format("{}", *verdict.first_divergence_round)
                                         : std::string("none"),
                                     verdict.output_gap);
  if (!witness.empty()) verdict.detail += "; " + witness;
  return verdict;
}

}  // namespace dpsim

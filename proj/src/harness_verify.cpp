#include <cmath>

#include <fmt/format.h>

#include "dpsim/bounds.hpp"
#include "dpsim/harness.hpp"

namespace dpsim {

std::string to_string(VerifySuite s) {
  switch (s) {
    case VerifySuite::locality: return "locality";
    case VerifySuite::bits: return "bits";
    case VerifySuite::async: return "async";
    case VerifySuite::gossip_recursion: return "gossip_recursion";
    case VerifySuite::all: return "all";
  }
  return "unknown";
}

VerifySuite verify_suite_from_string(const std::string& s) {
  for (auto v : {VerifySuite::locality, VerifySuite::bits, VerifySuite::async, VerifySuite::gossip_recursion,
                 VerifySuite::all}) {
    if (to_string(v) == s) return v;
  }
  throw ContractViolation(fmt::format("unknown verify suite '{}'", s));
}

bool VerifySummary::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

std::string VerifySummary::to_text() const {
  std::string out;
  std::size_t passed = 0;
  for (const auto& c : checks) {
    out += fmt::format("{} {}/{}: {}\n", c.pass ? "PASS" : "FAIL", c.suite, c.name, c.detail);
    if (c.pass) ++passed;
  }
  out += fmt::format("{}/{} checks passed\n", passed, checks.size());
  return out;
}

namespace {

constexpr double kGapTolerance = 1e-9;

void locality(VerifySummary& out) {
  const double gamma = 0.9;
  for (std::size_t l = 1; l <= 6; ++l) {
    const auto pair = gen_thm1_pair(l, gamma);
    const auto& a = pair.members[0];
    const auto& b = pair.members[1];
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
      out.checks.push_back({"locality", fmt::format("L={} {}", l, name), pass, detail});
    };
    for (std::size_t sweeps : {0, 3}) {
      ProtocolSpec spec{ProtocolKind::sdbp, sweeps, {}};
      const auto v = indistinguishability_check(spec, a, b, pair.ownership, pair.n_machines, pair.u, l - 1);
      add(fmt::format("sdbp sweeps={} R=L-1", sweeps), v.pass, v.detail);
    }
    for (auto kind : {ProtocolKind::gossip, ProtocolKind::flood}) {
      ProtocolSpec spec{kind, 0, {}};
      const auto v = indistinguishability_check(spec, a, b, pair.ownership, pair.n_machines, pair.u, l - 1);
      add(fmt::format("{} R=L-1", to_string(kind)), v.pass, v.detail);
    }
    ProtocolSpec flood{ProtocolKind::flood, 0, {}};
    const auto v = indistinguishability_check(flood, a, b, pair.ownership, pair.n_machines, pair.u, l,
                                              Precondition::report);
    const double expected = std::pow(gamma, static_cast<double>(l));
    add("flood R=L distinguishes", !v.pass && std::abs(v.output_gap - expected) <= kGapTolerance,
        fmt::format("output gap {:.12f}, gamma^L {:.12f}", v.output_gap, expected));
  }
}

void bits(VerifySummary& out) {
  for (std::size_t m : {1, 4}) {
    const auto family = gen_thm2_all(3, m, 0.9);
    for (std::optional<std::uint64_t> seed : {std::optional<std::uint64_t>{}, std::optional<std::uint64_t>{7}}) {
      BitProtocol proto;
      proto.shuffle_seed = seed;
      const auto r = verify_bit_lowerbound(family, proto);
      std::string counts;
      for (auto c : r.distinct_per_edge) counts += fmt::format("{} ", c);
      out.checks.push_back({"bits",
                            fmt::format("L=3 m={} {}", m, seed ? "shuffled" : "deterministic"),
                            r.all_distinct && r.correct,
                            fmt::format("distinct per cut edge: {}(need {}), correct {}", counts,
                                        r.instances, r.correct ? "yes" : "no")});
    }
  }
}

void async(VerifySummary& out) {
  TopologySpec spec;
  spec.kind = TopologyKind::ring;
  spec.machines = 16;
  RandomMdpParams params;
  params.gamma = 0.9;
  const auto inst = gen_topology_mdp(spec, params, 3);
  const DepGraph g = build_depgraph(inst.data);
  RunOptions opt;
  opt.rounds = 80;
  opt.vstar = solve_vstar(inst.mdp, kOracleTolerance);
  const auto sync = run_sdbp(inst.mdp, inst.data, g, DeltaNoise::none(), opt);
  for (std::uint64_t d : {1, 2, 4}) {
    for (auto mode : {DelayMode::adversarial_max, DelayMode::uniform_random}) {
      const auto r = run_async_sdbp(inst.mdp, inst.data, g, DeltaNoise::none(), DelaySchedule(mode, d, 11), opt);
      const auto v = compare_bounds(r, BoundKind::thm7_async);
      out.checks.push_back({"async", fmt::format("D={} {} error bound", d, to_string(mode)), v.all_satisfied,
                            fmt::format("{} rounds, min slack {:.3g}", v.rows.size(), v.min_slack)});
      if (d == 1) {
        bool same = r.rounds.size() == sync.rounds.size() && r.final_values == sync.final_values;
        for (std::size_t t = 0; same && t < r.rounds.size(); ++t) {
          same = r.rounds[t].sup_error == sync.rounds[t].sup_error;
        }
        out.checks.push_back({"async", fmt::format("D=1 {} matches synchronous", to_string(mode)), same,
                              same ? "identical trace" : "trace differs"});
      }
    }
  }
  const DelaySchedule adv(DelayMode::adversarial_max, 2);
  for (std::uint64_t b = 0; b <= 3; ++b) {
    const auto v = batch_lightcone_check(inst.mdp, inst.data, g, DeltaNoise::none(), adv, 0, b);
    out.checks.push_back({"async", fmt::format("lightcone D=2 b={}", b), v.pass, v.detail});
  }
}

void gossip_recursion(VerifySummary& out) {
  TopologySpec spec;
  spec.kind = TopologyKind::ring;
  spec.machines = 16;
  RandomMdpParams params;
  const auto inst = gen_topology_mdp(spec, params, 0);
  const DepGraph g = build_depgraph(inst.data);
  RunOptions opt;
  opt.rounds = 2000;
  opt.track_recursion = true;
  const auto r = run_gossip_fvi(inst.mdp, inst.data, g, mh_matrix(g), DeltaNoise::none(), opt);
  for (auto kind : {BoundKind::gossip_recursion, BoundKind::thm8_gossip, BoundKind::gossip_contraction}) {
    const auto v = compare_bounds(r, kind);
    out.checks.push_back({"gossip_recursion", fmt::format("ring16 {}", to_string(kind)), v.all_satisfied,
                          fmt::format("{} checks, {} violations, min slack {:.3g}", v.rows.size(),
                                      v.violations, v.min_slack)});
  }
}

}  // namespace

VerifySummary cmd_verify(VerifySuite suite) {
  VerifySummary out;
  const bool all = suite == VerifySuite::all;
  if (all || suite == VerifySuite::locality) locality(out);
  if (all || suite == VerifySuite::bits) bits(out);
  if (all || suite == VerifySuite::async) async(out);
  if (all || suite == VerifySuite::gossip_recursion) gossip_recursion(out);
  return out;
}

}  // namespace dpsim

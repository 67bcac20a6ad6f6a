#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "dpsim/instances.hpp"
#include "unit/oracles.hpp"

using namespace dpsim;

TEST_CASE("topology validation") {
  CHECK_THROWS_AS(topology_edges({TopologyKind::grid, 15}), ContractViolation);
  CHECK_THROWS_AS(topology_edges({TopologyKind::ring, 2}), ContractViolation);
  CHECK_THROWS_AS(topology_edges({TopologyKind::expander, 4}), ContractViolation);
  CHECK_THROWS_AS(topology_edges({TopologyKind::expander, 7, 3}), ContractViolation);
  CHECK_THROWS_AS(topology_from_string("torus"), ContractViolation);
  CHECK(topology_from_string("grid") == TopologyKind::grid);
}

TEST_CASE("topology edge counts") {
  CHECK(topology_edges({TopologyKind::ring, 64}).size() == 64);
  CHECK(topology_edges({TopologyKind::grid, 64}).size() == 112);
  CHECK(topology_edges({TopologyKind::star, 64}).size() == 63);
  CHECK(topology_edges({TopologyKind::path, 5}).size() == 4);
  TopologySpec tree;
  tree.kind = TopologyKind::tree;
  tree.tree_depth = 3;
  tree.branching = 2;
  CHECK(tree.machine_count() == 15);
  CHECK(topology_edges(tree).size() == 14);
}

TEST_CASE("expanders are connected simple regular graphs") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TopologySpec spec{TopologyKind::expander, 64};
    spec.seed = seed;
    const auto edges = topology_edges(spec);
    CHECK(edges.size() == 128);
    std::vector<int> deg(64, 0);
    std::set<Edge> uniq(edges.begin(), edges.end());
    CHECK(uniq.size() == edges.size());
    for (auto [a, b] : edges) {
      CHECK(a != b);
      ++deg[a];
      ++deg[b];
    }
    for (int d : deg) CHECK(d == 4);
    CHECK(DepGraph::from_undirected_edges(64, edges).connected());
  }
  TopologySpec a{TopologyKind::expander, 32}, b{TopologyKind::expander, 32};
  b.seed = 1;
  CHECK(topology_edges(a) == topology_edges(a));
  CHECK(topology_edges(a) != topology_edges(b));
}

TEST_CASE("random instances are valid, contiguous and serialize exactly") {
  TopologySpec spec{TopologyKind::grid, 16};
  RandomMdpParams params;
  params.states_per_machine = 5;
  const auto inst = gen_topology_mdp(spec, params, 3);
  CHECK(inst.mdp.n_states() == 80);
  for (StateId s = 0; s < 80; ++s) CHECK(inst.data.owner(s) == s / 5);
  for (double r : inst.mdp.rewards()) {
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
  CHECK(mdp_from_json(mdp_to_json(inst.mdp)) == inst.mdp);
  const auto again = gen_topology_mdp(spec, params, 3);
  CHECK(again.mdp == inst.mdp);
  CHECK_FALSE(gen_topology_mdp(spec, params, 4).mdp == inst.mdp);
}

TEST_CASE("two-point chain family") {
  for (std::size_t l : {1, 3, 6}) {
    for (bool decoy : {false, true}) {
      const double gamma = 0.8;
      const auto pair = gen_thm1_pair(l, gamma, decoy);
      REQUIRE(pair.members.size() == 2);
      const auto v0 = solve_vstar(pair.members[0], 1e-12);
      const auto v1 = solve_vstar(pair.members[1], 1e-12);
      for (StateId s = 0; s <= l; ++s) CHECK(v0[s] == 0.0);
      CHECK(v1[0] == doctest::Approx(std::pow(gamma, l)).epsilon(1e-10));
      CHECK(pair.u == 0);
      CHECK(pair.v == l);
      CHECK(build_depgraph(pair.dataset(0)).distance(0, l) == l);
    }
  }
}

TEST_CASE("parallel chain family values and decoding") {
  const auto h = gen_thm2_family(3, 2, 0.9, {true, false});
  const auto v = solve_vstar(h.members[0], 1e-12);
  CHECK(v[h.probes[0]] == doctest::Approx(0.729).epsilon(1e-10));
  CHECK(v[h.probes[1]] == 0.0);

  const auto all = gen_thm2_all(2, 3, 0.7);
  REQUIRE(all.members.size() == 8);
  const auto fp = build_depgraph(all.dataset(0)).support_fingerprint();
  const double scale = 0.49;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> jitter(-scale / 4.0 + 1e-9, scale / 4.0 - 1e-9);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(build_depgraph(all.dataset(i)).support_fingerprint() == fp);
    const auto vi = solve_vstar(all.members[i], 1e-12);
    for (std::size_t q = 0; q < 3; ++q) {
      CHECK(vi[all.probes[q]] == doctest::Approx(all.labels[i][q] ? scale : 0.0).epsilon(1e-10));
      // Any table within gamma^L / 4 decodes b by thresholding at gamma^L / 2.
      const double noisy = vi[all.probes[q]] + jitter(rng);
      CHECK((noisy > scale / 2.0) == all.labels[i][q]);
    }
  }
  const auto zero = gen_thm2_family(3, 2, 0.9, {false, false});
  const auto vz = solve_vstar(zero.members[0], 1e-12);
  for (StateId s = 0; s < zero.members[0].n_states(); ++s) CHECK(vz[s] == 0.0);
  CHECK_THROWS_AS(gen_thm2_family(3, 2, 0.9, {true}), ContractViolation);
}

TEST_CASE("federated tree") {
  const std::vector<bool> bits{true, false, true};
  const auto path = gen_thm2_family(3, 3, 0.9, bits);
  const auto degenerate = gen_fed_tree(3, 1, 3, 0.9, bits);
  CHECK(degenerate.members[0] == path.members[0]);
  CHECK(degenerate.ownership == path.ownership);

  const auto tree = gen_fed_tree(3, 3, 3, 0.9, bits);
  CHECK(tree.n_machines == 40);
  CHECK(tree.path == std::vector<MachineId>{0, 1, 4, 13});
  const auto vt = solve_vstar(tree.members[0], 1e-12);
  const auto vp = solve_vstar(path.members[0], 1e-12);
  // Chain states come first and never reach a filler, so the path values survive pruning.
  for (StateId s = 0; s < path.members[0].n_states(); ++s) CHECK(vt[s] == vp[s]);
  for (std::size_t q = 0; q < 3; ++q) {
    CHECK(vt[tree.probes[q]] == doctest::Approx(bits[q] ? std::pow(0.9, 3) : 0.0).epsilon(1e-10));
  }
  for (StateId s = path.members[0].n_states(); s < tree.members[0].n_states(); ++s) CHECK(vt[s] == 0.0);

  TopologySpec spec;
  spec.kind = TopologyKind::tree;
  spec.tree_depth = 3;
  spec.branching = 3;
  const DepGraph g = build_depgraph(tree.dataset(0));
  std::set<Edge> have;
  for (MachineId j = 0; j < g.n_machines(); ++j) {
    for (MachineId k : g.neighbors(j)) have.insert({std::min(j, k), std::max(j, k)});
  }
  const auto want = topology_edges(spec);
  CHECK(have == std::set<Edge>(want.begin(), want.end()));
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "dpsim/depgraph.hpp"
#include "dpsim/instances.hpp"
#include "unit/oracles.hpp"

using namespace dpsim;

namespace {

std::set<Edge> support(const DepGraph& g) {
  std::set<Edge> out;
  for (MachineId j = 0; j < g.n_machines(); ++j) {
    for (MachineId k : g.neighbors(j)) out.insert({std::min(j, k), std::max(j, k)});
  }
  return out;
}

TopologyInstance make(TopologyKind kind, std::size_t m, std::uint64_t seed = 0) {
  TopologySpec spec;
  spec.kind = kind;
  spec.machines = m;
  spec.seed = seed;
  return gen_topology_mdp(spec, RandomMdpParams{}, seed);
}

}  // namespace

TEST_CASE("chain dependency graph, weights and boundaries") {
  const auto pair = gen_thm1_pair(3, 0.9);
  const auto data = pair.dataset(1);
  const DepGraph g = build_depgraph(data);
  CHECK(g.n_machines() == 4);
  CHECK(g.weight(0, 1) == 1);
  CHECK(g.weight(1, 0) == 0);
  CHECK(g.adjacent(1, 0));
  CHECK(g.diameter() == 3);
  const auto b = g.boundary(0, 1);
  REQUIRE(b.size() == 1);
  CHECK(b[0] == 1);
  CHECK(g.boundary(1, 0).empty());
  CHECK(g.distance(0, 3) == 3);
  CHECK(g.ball(1, 1) == std::vector<MachineId>{0, 1, 2});
  CHECK(g.undirected_edge_count() == 3);
}

TEST_CASE("generated instances realize exactly the requested support") {
  for (auto kind : {TopologyKind::ring, TopologyKind::grid, TopologyKind::star, TopologyKind::expander,
                    TopologyKind::path}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto inst = make(kind, 16, seed);
      const DepGraph g = build_depgraph(inst.data);
      const std::set<Edge> want(inst.edges.begin(), inst.edges.end());
      CHECK(support(g) == want);
    }
  }
}

TEST_CASE("distances agree with Floyd-Warshall") {
  for (auto kind : {TopologyKind::ring, TopologyKind::grid, TopologyKind::expander, TopologyKind::star}) {
    const auto inst = make(kind, 25 - (kind == TopologyKind::expander ? 1 : 0), 4);
    const DepGraph g = build_depgraph(inst.data);
    const auto d = oracle::floyd(g.n_machines(), inst.edges);
    std::size_t diam = 0;
    for (MachineId i = 0; i < g.n_machines(); ++i) {
      for (MachineId j = 0; j < g.n_machines(); ++j) {
        CHECK(g.distance(i, j) == d[i][j]);
        diam = std::max(diam, d[i][j]);
      }
    }
    CHECK(g.diameter() == diam);
  }
}

TEST_CASE("canonical diameters") {
  CHECK(build_depgraph(make(TopologyKind::ring, 64).data).diameter() == 32);
  CHECK(build_depgraph(make(TopologyKind::grid, 64).data).diameter() == 14);
  CHECK(build_depgraph(make(TopologyKind::star, 64).data).diameter() == 2);
}

TEST_CASE("disconnected support is reported with components") {
  const DepGraph g = DepGraph::from_undirected_edges(4, {{0, 1}, {2, 3}});
  CHECK_FALSE(g.connected());
  CHECK(g.components().size() == 2);
  CHECK(g.distance(0, 2) == kUnreachable);
  try {
    mh_matrix(g);
    FAIL("expected DisconnectedGraph");
  } catch (const DisconnectedGraph& e) {
    CHECK(e.components().size() == 2);
  }
}

TEST_CASE("support fingerprint ignores rewards") {
  const auto pair = gen_thm1_pair(4, 0.9);
  CHECK(build_depgraph(pair.dataset(0)).support_fingerprint() ==
        build_depgraph(pair.dataset(1)).support_fingerprint());
  const auto other = gen_thm1_pair(5, 0.9);
  CHECK(build_depgraph(other.dataset(0)).support_fingerprint() !=
        build_depgraph(pair.dataset(0)).support_fingerprint());
}

TEST_CASE("discounted radius matches the multiplication scan") {
  CHECK(discounted_radius(0.95, 0.01) == 76);
  CHECK(discounted_radius(0.5, 0.25) == 0);
  CHECK(discounted_radius(0.9, 0.01) == oracle::radius(0.9, 0.01));
  for (double gamma : {0.3, 0.5, 0.7, 0.9, 0.95, 0.99}) {
    for (double eps : {0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.45}) {
      CHECK(discounted_radius(gamma, eps) == oracle::radius(gamma, eps));
    }
  }
  CHECK_THROWS_AS(discounted_radius(1.0, 0.1), ContractViolation);
  CHECK_THROWS_AS(discounted_radius(0.9, 0.5), ContractViolation);
  CHECK_THROWS_AS(discounted_radius(0.9, 0.0), ContractViolation);
}

TEST_CASE("dataset rejects a transition filed under the wrong machine") {
  std::vector<std::vector<DataTransition>> shards(2);
  shards[1].push_back({0, 0, 0.5, 1});
  CHECK_THROWS_AS(ShardedDataset(2, {0, 1}, shards), ContractViolation);
}

TEST_CASE("dataset consistency check catches a mismatched MDP") {
  const auto pair = gen_thm1_pair(2, 0.9);
  CHECK_NOTHROW(pair.dataset(1).check_consistent(pair.members[1]));
  CHECK_THROWS_AS(pair.dataset(0).check_consistent(pair.members[1]), ContractViolation);
}

TEST_CASE("partition file round trip and errors") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "dpsim_partition_test";
  fs::create_directories(dir);
  const auto inst = make(TopologyKind::ring, 5);
  const auto path = (dir / "p.txt").string();
  save_partition(inst.data, path);
  CHECK(load_partition(path) == inst.data.ownership());
  {
    std::ofstream out(dir / "bad.txt");
    out << "0 0\nzero one\n";
  }
  try {
    load_partition((dir / "bad.txt").string());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.where().find(":2") != std::string::npos);
  }
}

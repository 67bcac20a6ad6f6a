#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpsim/harness.hpp"

using namespace dpsim;
namespace fs = std::filesystem;

namespace {

const char* kConfig = R"(name: tiny
output_dir: OUT
topologies:
  - kind: ring
    machines: 8
  - kind: grid
    machines: 9
algorithms: [sdbp, broadcast, gossip, async_sdbp, sdbp_bandwidth]
gamma: 0.9
epsilon: 0.05
noise:
  delta: 0
  mode: none
mdp:
  states_per_machine: 3
seeds: [0, 1]
round_budget: 4000
async:
  delay: 2
  schedule: uniform_random
bandwidth_bits: 128
)";

std::string with_dir(const std::string& dir) {
  std::string text = kConfig;
  text.replace(text.find("OUT"), 3, dir);
  return text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parses and round trips") {
  const auto c = parse_config(with_dir("/tmp/x"));
  CHECK(c.name == "tiny");
  CHECK(c.topologies.size() == 2);
  CHECK(c.topologies[1].kind == TopologyKind::grid);
  CHECK(c.algorithms.size() == 5);
  CHECK(c.gamma == 0.9);
  CHECK(c.mdp.states_per_machine == 3);
  CHECK(c.mdp.gamma == 0.9);
  CHECK(c.seeds == std::vector<std::uint64_t>{0, 1});
  CHECK(c.delay == 2);
  CHECK(c.schedule == DelayMode::uniform_random);
  CHECK(c.bandwidth_bits == 128);
  const auto yaml = config_to_yaml(c);
  const auto back = parse_config(yaml);
  CHECK(config_to_yaml(back) == yaml);
  CHECK(config_hash(back) == config_hash(c));
  auto changed = c;
  changed.epsilon = 0.04;
  CHECK(config_hash(changed) != config_hash(c));
}

TEST_CASE("config errors name their location") {
  try {
    parse_config("name: x\ncolour: blue\n", "c.yaml");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.where() == "c.yaml:2:1");
  }
  try {
    parse_config("topologies:\n  - kind: grid\n    machines: 15\nalgorithms: [sdbp]\n", "c.yaml");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("perfect-square") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("gamma: [1, 2\n", "c.yaml"), ParseError);
  CHECK_THROWS_AS(parse_config("topologies:\n  - kind: ring\n    machines: 8\nalgorithms: [magic]\n"), ParseError);
  CHECK_THROWS_AS(parse_config("gamma: fast\n"), ParseError);
}

TEST_CASE("run writes deterministic reports") {
  const auto root = fs::temp_directory_path() / "dpsim_harness_test";
  fs::remove_all(root);
  auto c1 = parse_config(with_dir((root / "a").string()));
  auto c2 = parse_config(with_dir((root / "b").string()));
  c2.workers = 3;
  const auto s1 = cmd_run(c1);
  const auto s2 = cmd_run(c2);
  CHECK(s1.runs.size() == 2 * 2 * 5);
  CHECK(s1.markdown == s2.markdown);
  CHECK(s1.csv == s2.csv);
  for (const auto& rec : s1.runs) {
    CHECK(slurp(root / "a" / rec.csv_file) == slurp(root / "b" / rec.csv_file));
    CHECK(rec.bound_violations == 0);
  }
  CHECK(slurp(root / "a" / "summary.md") == s1.markdown);
  CHECK(fs::exists(root / "a" / "summary.csv"));
  const auto manifest = slurp(root / "a" / "manifest.json");
  CHECK(manifest.find(config_hash(c1)) != std::string::npos);
  CHECK(manifest.find("\"version\"") != std::string::npos);
  // Same config again: byte-identical.
  cmd_run(c1);
  CHECK(slurp(root / "a" / "manifest.json") == manifest);
  for (const auto& row : s1.rows) {
    REQUIRE(row.cells.size() == 5);
    CHECK(row.cells[0].mean == row.cells[1].mean);
    CHECK(row.cells[0].std == row.cells[1].std);
    CHECK(row.cells[0].exceeded == 0);
  }
}

TEST_CASE("budget overruns are recorded, not raised") {
  auto c = parse_config(with_dir("/unused"));
  c.round_budget = 5;
  c.algorithms = {Algorithm::sdbp};
  const auto s = cmd_run(c, false);
  for (const auto& rec : s.runs) {
    CHECK(rec.budget_exceeded);
    CHECK_FALSE(rec.rounds_to_target);
  }
  CHECK(s.markdown.find("> 5") != std::string::npos);
}

TEST_CASE("analyze reports spectra, radii and budgets") {
  TopologySpec ring{TopologyKind::ring, 64};
  const auto inst = gen_topology_mdp(ring, {}, 0);
  const auto r = cmd_analyze(inst.mdp, inst.data, 0.01, 4);
  CHECK(r.machines == 64);
  CHECK(r.diameter == 32);
  CHECK(r.gap == doctest::Approx(0.0024076).epsilon(1e-4));
  CHECK(r.phi_graph == doctest::Approx(0.03125));
  CHECK(r.l_eps == 76);
  CHECK(r.direct_rounds == 149);
  CHECK(r.async_rounds == 4 * 149);
  REQUIRE(r.gossip_rounds);
  CHECK(*r.gossip_rounds > r.direct_rounds);
  CHECK(r.cheeger.note.empty());
  CHECK(r.to_json().find("\"L_eps\": 76") != std::string::npos);

  TopologySpec star{TopologyKind::star, 64};
  const auto s = gen_topology_mdp(star, {}, 0);
  const auto rs = cmd_analyze(s.mdp, s.data, 0.01);
  CHECK(rs.phi_graph == 1.0);
  CHECK(rs.gap == doctest::Approx(1.0 / 126.0));
  CHECK(rs.to_text().find("note: ") != std::string::npos);

  const auto dir = fs::temp_directory_path() / "dpsim_analyze_test";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "mdp.json");
    out << mdp_to_json(inst.mdp);
  }
  save_partition(inst.data, (dir / "p.txt").string());
  const auto rf = cmd_analyze_files((dir / "mdp.json").string(), (dir / "p.txt").string(), 0.01);
  CHECK(rf.gap == r.gap);
  CHECK_THROWS_AS(cmd_analyze_files((dir / "missing.json").string(), (dir / "p.txt").string(), 0.01), ParseError);
}

TEST_CASE("verify suites pass") {
  for (auto suite : {VerifySuite::locality, VerifySuite::bits, VerifySuite::async, VerifySuite::gossip_recursion}) {
    const auto s = cmd_verify(suite);
    CHECK(!s.checks.empty());
    CHECK_MESSAGE(s.all_pass(), s.to_text());
  }
  CHECK(verify_suite_from_string("all") == VerifySuite::all);
  CHECK_THROWS_AS(verify_suite_from_string("everything"), ContractViolation);
}

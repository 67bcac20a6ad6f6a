#include <doctest.h>

#include <cmath>

#include "dpsim/async.hpp"
#include "dpsim/bounds.hpp"
#include "dpsim/instances.hpp"
#include "unit/oracles.hpp"

using namespace dpsim;

namespace {

TopologyInstance ring16(std::uint64_t seed = 0) {
  TopologySpec spec;
  spec.kind = TopologyKind::ring;
  spec.machines = 16;
  RandomMdpParams params;
  params.gamma = 0.9;
  return gen_topology_mdp(spec, params, seed);
}

RunOptions rounds(std::uint64_t t) {
  RunOptions o;
  o.rounds = t;
  return o;
}

}  // namespace

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS(DelaySchedule(DelayMode::uniform_random, 0), ContractViolation);
  CHECK_THROWS_AS(DelaySchedule(DelayMode::uniform_random, 2, 0, 3), ContractViolation);
  CHECK_THROWS_AS(DelaySchedule(DelayMode::uniform_random, 2, 0, 0), ContractViolation);
  CHECK_NOTHROW(DelaySchedule(DelayMode::per_edge_fixed, 4, 0, 4));
  CHECK(delay_mode_from_string("per_edge_fixed") == DelayMode::per_edge_fixed);
  CHECK_THROWS_AS(delay_mode_from_string("lossy"), ContractViolation);
}

TEST_CASE("scheduled delays stay below D and updates come at least once per D rounds") {
  for (auto mode : {DelayMode::adversarial_max, DelayMode::uniform_random, DelayMode::per_edge_fixed}) {
    for (std::uint64_t d : {1, 2, 3, 5}) {
      const DelaySchedule s(mode, d, 17, d);
      std::uint64_t seen_max = 0;
      for (MachineId a = 0; a < 4; ++a) {
        for (std::uint64_t t = 0; t < 40; ++t) {
          const auto x = s.delay(a, a + 1, t);
          CHECK(x < d);
          seen_max = std::max(seen_max, x);
        }
        std::uint64_t last = 0;
        bool first = true;
        for (std::uint64_t t = 0; t < 40; ++t) {
          if (!s.updates(a, t)) continue;
          if (!first) CHECK(t - last <= d);
          CHECK((!first || t < d));
          first = false;
          last = t;
        }
      }
      if (mode == DelayMode::adversarial_max) CHECK(seen_max == d - 1);
    }
  }
  const DelaySchedule adv(DelayMode::adversarial_max, 3);
  CHECK_FALSE(adv.updates(0, 0));
  CHECK_FALSE(adv.updates(0, 1));
  CHECK(adv.updates(0, 2));
  CHECK(DelaySchedule(DelayMode::adversarial_max, 3, 0, 1, true).updates(0, 0));
}

TEST_CASE("D = 1 reproduces synchronous SDBP round for round") {
  const auto inst = ring16(2);
  const DepGraph g = build_depgraph(inst.data);
  RunOptions opt = rounds(40);
  opt.record_history = true;
  const DeltaNoise noise{0.01, 3, NoiseMode::uniform_bounded};
  const auto sync = run_sdbp(inst.mdp, inst.data, g, noise, opt);
  for (auto mode : {DelayMode::adversarial_max, DelayMode::uniform_random, DelayMode::per_edge_fixed}) {
    const auto a = run_async_sdbp(inst.mdp, inst.data, g, noise, DelaySchedule(mode, 1, 5), opt);
    REQUIRE(a.history.size() == sync.history.size());
    for (std::size_t t = 0; t < a.history.size(); ++t) CHECK(a.history[t] == sync.history[t]);
    CHECK(a.bits.total() == sync.bits.total());
  }
}

TEST_CASE("async error bound holds for every schedule") {
  const auto inst = ring16(4);
  const DepGraph g = build_depgraph(inst.data);
  for (std::uint64_t d : {1, 2, 4}) {
    for (auto mode : {DelayMode::adversarial_max, DelayMode::uniform_random, DelayMode::per_edge_fixed}) {
      for (auto noise : {DeltaNoise::none(), DeltaNoise{0.02, 1, NoiseMode::worst_case_sign}}) {
        const auto r = run_async_sdbp(inst.mdp, inst.data, g, noise, DelaySchedule(mode, d, 9), rounds(150));
        CHECK(compare_bounds(r, BoundKind::thm7_async).all_satisfied);
      }
    }
  }
}

TEST_CASE("partial-batch updates keep the error bound") {
  const auto inst = ring16(5);
  const DepGraph g = build_depgraph(inst.data);
  const auto r = run_async_sdbp(inst.mdp, inst.data, g, DeltaNoise{0.02, 1, NoiseMode::uniform_bounded},
                                DelaySchedule(DelayMode::adversarial_max, 3, 0, 1, true), rounds(100));
  CHECK(compare_bounds(r, BoundKind::thm7_async).all_satisfied);
}

TEST_CASE("batch snapshots are taken every D rounds") {
  const auto inst = ring16();
  const auto r = run_async_sdbp(inst.mdp, inst.data, build_depgraph(inst.data), DeltaNoise::none(),
                                DelaySchedule(DelayMode::uniform_random, 3, 1), rounds(10));
  REQUIRE(r.batches.size() == 4);
  for (std::size_t b = 0; b < 4; ++b) {
    CHECK(r.batches[b].batch == b);
    CHECK(r.batches[b].round == 3 * b);
  }
  CHECK(r.batches[0].values == ValueTable(inst.mdp.n_states()));
  const auto csv = report_csv(r);
  CHECK(csv.find(",batch\n") != std::string::npos);
  CHECK(csv.find("\n9,") != std::string::npos);
}

TEST_CASE("adversarial batches track truncated value iteration") {
  const auto inst = ring16(6);
  const DepGraph g = build_depgraph(inst.data);
  auto dense = oracle::densify(inst.mdp);
  const double gamma = inst.mdp.gamma();
  for (auto noise : {DeltaNoise::none(), DeltaNoise{0.03, 2, NoiseMode::uniform_bounded}}) {
    const auto r = run_async_sdbp(inst.mdp, inst.data, g, noise, DelaySchedule(DelayMode::adversarial_max, 3),
                                  rounds(60));
    std::vector<double> v(inst.mdp.n_states(), 0.0);
    for (const auto& b : r.batches) {
      const double gap = oracle::sup(v, b.values.values());
      CHECK(gap <= noise.delta / (1.0 - gamma) + 1e-12);
      if (!noise.active()) CHECK(gap <= 1e-12);
      v = oracle::bellman(dense, v);
    }
  }
}

TEST_CASE("faster schedules run ahead of truncated value iteration but stay below the fixed point") {
  const auto inst = ring16(7);
  const DepGraph g = build_depgraph(inst.data);
  auto dense = oracle::densify(inst.mdp);
  const auto vs = oracle::vstar(dense);
  const auto r = run_async_sdbp(inst.mdp, inst.data, g, DeltaNoise::none(),
                                DelaySchedule(DelayMode::uniform_random, 3, 2), rounds(60));
  std::vector<double> v(inst.mdp.n_states(), 0.0);
  double ahead = 0.0;
  for (const auto& b : r.batches) {
    for (StateId s = 0; s < inst.mdp.n_states(); ++s) {
      CHECK(b.values[s] >= v[s] - 1e-12);
      CHECK(b.values[s] <= vs[s] + 1e-12);
      ahead = std::max(ahead, b.values[s] - v[s]);
    }
    v = oracle::bellman(dense, v);
  }
  CHECK(ahead > 1e-6);
}

TEST_CASE("adversarial delay stretches the chain light cone by D") {
  const std::size_t d = 3;
  for (std::size_t l : {2, 4, 6}) {
    const auto pair = gen_thm1_pair(l, 0.9);
    const auto data = pair.dataset(1);
    RunOptions opt = rounds(d * (l + 3));
    opt.record_history = true;
    const auto r = run_async_sdbp(pair.members[1], data, build_depgraph(data), DeltaNoise::none(),
                                  DelaySchedule(DelayMode::adversarial_max, d), opt);
    std::optional<std::size_t> first;
    for (std::size_t t = 0; t < r.history.size(); ++t) {
      if (r.history[t][0] != 0.0) {
        first = t;
        break;
      }
    }
    REQUIRE(first);
    CHECK(*first >= l);
    CHECK(*first >= d * l);
    CHECK(*first <= 3 * l + 3);
  }
}

TEST_CASE("batch light cone on a ring") {
  const auto inst = ring16(8);
  const DepGraph g = build_depgraph(inst.data);
  const DelaySchedule s(DelayMode::adversarial_max, 2);
  CHECK(batch_lightcone_check(inst.mdp, inst.data, g, DeltaNoise::none(), s, 0, 0).pass);
  for (std::uint64_t b = 1; b <= 5; ++b) {
    CHECK(batch_lightcone_check(inst.mdp, inst.data, g, DeltaNoise::none(), s, 3, b).pass);
  }
  // Machine 3 reads a distance-3 shard: invisible through batch 3, visible in batch 4.
  CHECK(batch_lightcone_check(inst.mdp, inst.data, g, DeltaNoise::none(), s, 3, 3, 3).pass);
  const auto late = batch_lightcone_check(inst.mdp, inst.data, g, DeltaNoise::none(), s, 3, 4, 3);
  CHECK_FALSE(late.pass);
  CHECK(late.max_gap > 0.0);
  const DelaySchedule sync(DelayMode::adversarial_max, 1);
  CHECK(batch_lightcone_check(inst.mdp, inst.data, g, DeltaNoise::none(), sync, 2, 4).pass);
}

TEST_CASE("async round bound") {
  CHECK(async_round_bound(0.95, 0.01, 1) == 76);
  CHECK(async_round_bound(0.95, 0.01, 4) == 304);
  CHECK(async_round_bound(0.5, 0.25, 7) == 0);
  CHECK_THROWS_AS(async_round_bound(0.95, 0.01, 0), ContractViolation);
}

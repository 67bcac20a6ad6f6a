#include <doctest.h>

#include <random>

#include "dpsim/instances.hpp"
#include "dpsim/mdp.hpp"
#include "unit/oracles.hpp"

using namespace dpsim;

namespace {

Mdp random_mdp(std::uint64_t seed, std::size_t n = 12, std::size_t na = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<StateId> pick(0, static_cast<StateId>(n - 1));
  std::vector<std::vector<Successor>> rows(n * na);
  std::vector<double> rewards(n * na);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double total = 0.0;
    for (int k = 0; k < 3; ++k) {
      rows[i].push_back({pick(rng), u(rng) + 0.1});
      total += rows[i].back().prob;
    }
    for (auto& s : rows[i]) s.prob /= total;
    rewards[i] = u(rng);
  }
  return Mdp(n, na, 0.9, rows, rewards);
}

}  // namespace

TEST_CASE("mdp rejects invalid tables") {
  CHECK_THROWS_AS(Mdp(1, 1, 1.0, {{{0, 1.0}}}, {0.0}), ContractViolation);
  CHECK_THROWS_AS(Mdp(1, 1, 0.0, {{{0, 1.0}}}, {0.0}), ContractViolation);
  CHECK_THROWS_AS(Mdp(1, 1, 0.9, {{{0, 0.5}}}, {0.0}), ContractViolation);
  CHECK_THROWS_AS(Mdp(1, 1, 0.9, {{{0, 1.0}}}, {1.5}), ContractViolation);
  CHECK_THROWS_AS(Mdp(1, 1, 0.9, {{{3, 1.0}}}, {0.5}), ContractViolation);
  CHECK_THROWS_AS(Mdp(1, 1, 0.9, {{{0, -0.5}, {0, 1.5}}}, {0.5}), ContractViolation);
}

TEST_CASE("mdp merges duplicate successors in canonical order") {
  Mdp m(3, 1, 0.9, {{{2, 0.25}, {1, 0.5}, {2, 0.25}}, {{1, 1.0}}, {{2, 1.0}}}, {0.1, 0.2, 0.3});
  const auto row = m.successors(0, 0);
  REQUIRE(row.size() == 2);
  CHECK(row[0] == Successor{1, 0.5});
  CHECK(row[1] == Successor{2, 0.5});
}

TEST_CASE("bellman operator matches a dense oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Mdp m = random_mdp(seed);
    auto d = oracle::densify(m);
    std::mt19937_64 rng(seed + 100);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    ValueTable v(m.n_states());
    std::vector<double> raw(m.n_states());
    for (std::size_t s = 0; s < m.n_states(); ++s) raw[s] = v[s] = u(rng);
    const auto want = oracle::bellman(d, raw);
    CHECK(oracle::sup(want, bellman_apply(m, v).values()) <= 1e-12);
  }
}

TEST_CASE("bellman_apply on a subset passes other states through") {
  const Mdp m = random_mdp(3);
  ValueTable v(m.n_states(), 2.0);
  const std::vector<StateId> subset{1, 4};
  const auto out = bellman_apply(m, v, std::span<const StateId>(subset));
  const auto full = bellman_apply(m, v);
  for (StateId s = 0; s < m.n_states(); ++s) {
    if (s == 1 || s == 4) {
      CHECK(out[s] == full[s]);
    } else {
      CHECK(out[s] == 2.0);
    }
  }
}

TEST_CASE("solve_vstar meets its tolerance against the oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Mdp m = random_mdp(seed);
    auto d = oracle::densify(m);
    const auto want = oracle::vstar(d);
    const auto sol = solve_vstar_with_stats(m, 1e-10);
    CHECK(oracle::sup(want, sol.values.values()) <= 1e-10);
    CHECK(sol.iterations > 0);
  }
}

TEST_CASE("truncated_vstar equals T applications from zero") {
  const Mdp m = random_mdp(7);
  auto d = oracle::densify(m);
  for (std::size_t t : {0, 1, 2, 5, 20}) {
    CHECK(oracle::sup(oracle::truncated(d, t), truncated_vstar(m, t).values()) <= 1e-12);
  }
}

TEST_CASE("two-state chain values") {
  const auto pair = gen_thm1_pair(1, 0.5);
  const auto v = solve_vstar(pair.members[1], 1e-12);
  CHECK(v[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(1.0).epsilon(1e-12));
  const auto zero = solve_vstar(pair.members[0], 1e-12);
  CHECK(zero[0] == 0.0);
  CHECK(zero[1] == 0.0);
}

TEST_CASE("noise offsets are bounded, reproducible and coherent in worst-case mode") {
  DeltaNoise u{0.05, 9, NoiseMode::uniform_bounded};
  double lo = 1.0, hi = -1.0;
  for (MachineId j = 0; j < 4; ++j) {
    for (std::uint64_t t = 0; t < 50; ++t) {
      for (StateId s = 0; s < 10; ++s) {
        const double x = u.offset(j, t, s);
        CHECK(std::abs(x) <= 0.05);
        CHECK(x == u.offset(j, t, s));
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
  }
  CHECK(lo < -0.04);
  CHECK(hi > 0.04);
  DeltaNoise even{0.05, 4, NoiseMode::worst_case_sign}, odd{0.05, 5, NoiseMode::worst_case_sign};
  CHECK(even.offset(1, 2, 3) == 0.05);
  CHECK(odd.offset(1, 2, 3) == -0.05);
  CHECK_FALSE(DeltaNoise::none().active());
  CHECK_THROWS_AS((DeltaNoise{-1.0, 0, NoiseMode::uniform_bounded}.validate()), ContractViolation);
  CHECK(noise_mode_from_string(to_string(NoiseMode::worst_case_sign)) == NoiseMode::worst_case_sign);
  CHECK_THROWS_AS(noise_mode_from_string("gaussian"), ContractViolation);
}

TEST_CASE("noisy bellman shifts each updated state by its offset") {
  const Mdp m = random_mdp(11);
  DeltaNoise n{0.01, 3, NoiseMode::uniform_bounded};
  ValueTable v(m.n_states(), 1.0);
  const auto exact = bellman_apply(m, v);
  const auto noisy = bellman_apply_noisy(m, v, n, 2, 7);
  for (StateId s = 0; s < m.n_states(); ++s) CHECK(noisy[s] == exact[s] + n.offset(2, 7, s));
}

TEST_CASE("mdp json round trip is bit exact") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Mdp m = random_mdp(seed);
    const Mdp back = mdp_from_json(mdp_to_json(m));
    CHECK(back == m);
    CHECK(mdp_to_json(back) == mdp_to_json(m));
  }
}

TEST_CASE("mdp json errors carry a location") {
  try {
    mdp_from_json("{\"n_states\": 1,", "bad.json");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.where().find("bad.json: byte") == 0);
  }
  try {
    mdp_from_json(R"({"n_states": 1, "n_actions": 1, "gamma": 0.9, "rewards": []})", "m.json");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("transitions") != std::string::npos);
  }
}

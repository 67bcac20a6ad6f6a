#include "dpsim/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "dpsim/error.hpp"
#include "detail/mix.hpp"

namespace dpsim {

Mdp::Mdp(std::size_t n_states, std::size_t n_actions, double gamma,
         std::vector<std::vector<Successor>> rows, std::vector<double> rewards)
    : n_states_(n_states),
      n_actions_(n_actions),
      gamma_(gamma),
      rows_(std::move(rows)),
      rewards_(std::move(rewards)) {
  if (n_states_ == 0 || n_actions_ == 0) {
    throw ContractViolation("Mdp: need at least one state and one action");
  }
  if (!(gamma_ > 0.0 && gamma_ < 1.0)) {
    throw ContractViolation(fmt::format("Mdp: gamma {} outside (0, 1)", gamma_));
  }
  const std::size_t n_rows = n_states_ * n_actions_;
  if (rows_.size() != n_rows || rewards_.size() != n_rows) {
    throw ContractViolation("Mdp: transition/reward tables must have n_states * n_actions rows");
  }
  for (std::size_t i = 0; i < n_rows; ++i) {
    auto& row = rows_[i];
    std::sort(row.begin(), row.end(),
              [](const Successor& a, const Successor& b) { return a.next < b.next; });
    std::vector<Successor> merged;
    merged.reserve(row.size());
    for (const auto& succ : row) {
      if (succ.next >= n_states_) {
        throw ContractViolation(fmt::format("Mdp: successor {} out of range in row {}", succ.next, i));
      }
      if (!(succ.prob >= 0.0) || !std::isfinite(succ.prob)) {
        throw ContractViolation(fmt::format("Mdp: negative or non-finite probability in row {}", i));
      }
      if (!merged.empty() && merged.back().next == succ.next) {
        merged.back().prob += succ.prob;
      } else {
        merged.push_back(succ);
      }
    }
    std::erase_if(merged, [](const Successor& s) { return s.prob == 0.0; });
    double total = 0.0;
    for (const auto& succ : merged) total += succ.prob;
    if (std::abs(total - 1.0) > 1e-12) {
      throw ContractViolation(fmt::format(
          "Mdp: probabilities of (s={}, a={}) sum to {:.17g}", i / n_actions_, i % n_actions_, total));
    }
    row = std::move(merged);
    const double r = rewards_[i];
    if (!(r >= 0.0 && r <= 1.0)) {
      throw ContractViolation(fmt::format(
          "Mdp: reward {} of (s={}, a={}) outside [0, 1]", r, i / n_actions_, i % n_actions_));
    }
  }
}

Mdp Mdp::from_entries(std::size_t n_states, std::size_t n_actions, double gamma,
                      const std::vector<Entry>& entries, const std::vector<double>& rewards) {
  std::vector<std::vector<Successor>> rows(n_states * n_actions);
  for (const auto& e : entries) {
    if (e.state >= n_states || e.action >= n_actions) {
      throw ContractViolation(fmt::format("Mdp: entry (s={}, a={}) out of range", e.state, e.action));
    }
    rows[static_cast<std::size_t>(e.state) * n_actions + e.action].push_back({e.next, e.prob});
  }
  return Mdp(n_states, n_actions, gamma, std::move(rows), rewards);
}

Mdp Mdp::with_rewards(std::vector<double> rewards) const {
  return Mdp(n_states_, n_actions_, gamma_, rows_, std::move(rewards));
}

double sup_distance(const ValueTable& a, const ValueTable& b) {
  if (a.size() != b.size()) {
    throw ContractViolation("sup_distance: tables differ in length");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

void DeltaNoise::validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw ContractViolation(fmt::format("DeltaNoise: delta {} must be finite and >= 0", delta));
  }
}

double DeltaNoise::offset(MachineId machine, std::uint64_t round, StateId state) const {
  switch (mode) {
    case NoiseMode::none:
      return 0.0;
    case NoiseMode::worst_case_sign:
      return (seed & 1U) ? -delta : delta;
    case NoiseMode::uniform_bounded: {
      const std::uint64_t h = detail::mix_keys({seed, machine, round, state});
      // 53 random mantissa bits -> [0, 1), then onto [-delta, delta].
      const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
      return delta * (2.0 * u - 1.0);
    }
  }
  return 0.0;
}

std::string to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::none: return "none";
    case NoiseMode::uniform_bounded: return "uniform_bounded";
    case NoiseMode::worst_case_sign: return "worst_case_sign";
  }
  return "none";
}

NoiseMode noise_mode_from_string(const std::string& s) {
  if (s == "none") return NoiseMode::none;
  if (s == "uniform_bounded" || s == "uniform") return NoiseMode::uniform_bounded;
  if (s == "worst_case_sign" || s == "worst_case") return NoiseMode::worst_case_sign;
  throw ContractViolation("unknown noise mode '" + s + "'");
}

namespace {

void check_dims(const Mdp& mdp, const ValueTable& v) {
  if (v.size() != mdp.n_states()) {
    throw ContractViolation(fmt::format("value table has {} entries, MDP has {} states", v.size(),
                                        mdp.n_states()));
  }
}

template <typename PerState>
ValueTable apply_on(const Mdp& mdp, const ValueTable& v,
                    std::optional<std::span<const StateId>> states, PerState&& per_state) {
  check_dims(mdp, v);
  ValueTable out = v;
  auto lookup = [&v](StateId s) { return v[s]; };
  if (states) {
    for (StateId s : *states) {
      if (s >= mdp.n_states()) throw ContractViolation("bellman_apply: state out of range");
      out[s] = per_state(s, backup_state(mdp, s, lookup));
    }
  } else {
    for (StateId s = 0; s < mdp.n_states(); ++s) out[s] = per_state(s, backup_state(mdp, s, lookup));
  }
  return out;
}

}  // namespace

ValueTable bellman_apply(const Mdp& mdp, const ValueTable& v,
                         std::optional<std::span<const StateId>> states) {
  return apply_on(mdp, v, states, [](StateId, double x) { return x; });
}

ValueTable bellman_apply_noisy(const Mdp& mdp, const ValueTable& v, const DeltaNoise& noise,
                               MachineId machine, std::uint64_t round,
                               std::optional<std::span<const StateId>> states) {
  noise.validate();
  return apply_on(mdp, v, states, [&](StateId s, double x) {
    return x + noise.offset(machine, round, s);
  });
}

VstarSolution solve_vstar_with_stats(const Mdp& mdp, double tol) {
  if (!(tol > 0.0)) throw ContractViolation("solve_vstar: tol must be > 0");
  const double gamma = mdp.gamma();
  const double stop = tol * (1.0 - gamma) / gamma;
  VstarSolution sol{ValueTable(mdp.n_states()), 0};
  ValueTable next(mdp.n_states());
  while (true) {
    double step = 0.0;
    for (StateId s = 0; s < mdp.n_states(); ++s) {
      next[s] = backup_state(mdp, s, [&](StateId t) { return sol.values[t]; });
      step = std::max(step, std::abs(next[s] - sol.values[s]));
    }
    std::swap(sol.values, next);
    ++sol.iterations;
    if (step <= stop) break;
  }
  return sol;
}

ValueTable solve_vstar(const Mdp& mdp, double tol) { return solve_vstar_with_stats(mdp, tol).values; }

ValueTable truncated_vstar(const Mdp& mdp, std::size_t horizon) {
  ValueTable v(mdp.n_states());
  for (std::size_t t = 0; t < horizon; ++t) v = bellman_apply(mdp, v);
  return v;
}

}  // namespace dpsim

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dpsim {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;
using MachineId = std::uint32_t;

struct Successor {
  StateId next;
  double prob;

  bool operator==(const Successor&) const = default;
};

/// Tabular discounted MDP with sparse successor lists.
///
/// Every (state, action) row must be a probability distribution (sum within
/// 1e-12), rewards lie in [0, 1] and gamma in (0, 1). The constructor
/// canonicalizes each row by sorting successors and merging duplicates.
class Mdp {
 public:
  struct Entry {
    StateId state;
    ActionId action;
    StateId next;
    double prob;
  };

  Mdp(std::size_t n_states, std::size_t n_actions, double gamma,
      std::vector<std::vector<Successor>> rows, std::vector<double> rewards);

  /// Builds from flat (s, a, s', p) and per-(s, a) reward lists.
  static Mdp from_entries(std::size_t n_states, std::size_t n_actions,
                          double gamma, const std::vector<Entry>& entries,
                          const std::vector<double>& rewards);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  double gamma() const noexcept { return gamma_; }

  std::span<const Successor> successors(StateId s, ActionId a) const {
    return rows_[index(s, a)];
  }
  double reward(StateId s, ActionId a) const { return rewards_[index(s, a)]; }

  /// Copy with a replaced reward table (same dynamics).
  Mdp with_rewards(std::vector<double> rewards) const;
  const std::vector<double>& rewards() const noexcept { return rewards_; }

  bool operator==(const Mdp&) const = default;

 private:
  std::size_t index(StateId s, ActionId a) const {
    return static_cast<std::size_t>(s) * n_actions_ + a;
  }

  std::size_t n_states_;
  std::size_t n_actions_;
  double gamma_;
  std::vector<std::vector<Successor>> rows_;
  std::vector<double> rewards_;
};

/// Value estimate indexed by state.
class ValueTable {
 public:
  ValueTable() = default;
  explicit ValueTable(std::size_t n, double fill = 0.0) : v_(n, fill) {}
  explicit ValueTable(std::vector<double> v) : v_(std::move(v)) {}

  std::size_t size() const noexcept { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<const double> values() const noexcept { return v_; }
  std::span<double> values() noexcept { return v_; }

  bool operator==(const ValueTable&) const = default;

 private:
  std::vector<double> v_;
};

double sup_distance(const ValueTable& a, const ValueTable& b);

enum class NoiseMode { none, uniform_bounded, worst_case_sign };

/// Reproducible bounded perturbation of local Bellman backups.
///
/// offset(machine, round, state) is a pure function of its arguments and the
/// seed. `uniform_bounded` draws uniformly from [-delta, delta] per call
/// site; `worst_case_sign` applies a coherent shift of exactly +delta (even
/// seed) or -delta (odd seed) to every entry, which is the adversary that
/// accumulates the full delta / (1 - gamma) error.
struct DeltaNoise {
  double delta = 0.0;
  std::uint64_t seed = 0;
  NoiseMode mode = NoiseMode::none;

  static DeltaNoise none() { return {}; }

  void validate() const;
  bool active() const noexcept { return mode != NoiseMode::none && delta > 0.0; }
  double offset(MachineId machine, std::uint64_t round, StateId state) const;
};

std::string to_string(NoiseMode mode);
NoiseMode noise_mode_from_string(const std::string& s);

/// One-step backup at `s`. `value_of(StateId) -> double` supplies successor
/// values; the summation order is fixed by the canonical successor order so
/// every caller computes bit-identical results from identical inputs. Ties
/// in the max go to the lowest action index.
template <typename Lookup>
double backup_state(const Mdp& mdp, StateId s, Lookup&& value_of) {
  double best = 0.0;
  for (ActionId a = 0; a < mdp.n_actions(); ++a) {
    double expected = 0.0;
    for (const Successor& succ : mdp.successors(s, a)) {
      expected += succ.prob * value_of(succ.next);
    }
    const double q = mdp.reward(s, a) + mdp.gamma() * expected;
    if (a == 0 || q > best) best = q;
  }
  return best;
}

/// Exact Bellman operator; states outside `states` are copied through.
ValueTable bellman_apply(const Mdp& mdp, const ValueTable& v,
                         std::optional<std::span<const StateId>> states = {});

/// Exact backup plus `noise.offset(machine, round, s)` at each updated state.
ValueTable bellman_apply_noisy(const Mdp& mdp, const ValueTable& v,
                               const DeltaNoise& noise, MachineId machine,
                               std::uint64_t round,
                               std::optional<std::span<const StateId>> states = {});

struct VstarSolution {
  ValueTable values;
  std::size_t iterations = 0;
};

/// Value iteration from zero until the sup-norm step is at most
/// tol * (1 - gamma) / gamma, which certifies ||V - V*|| <= tol.
VstarSolution solve_vstar_with_stats(const Mdp& mdp, double tol);
ValueTable solve_vstar(const Mdp& mdp, double tol);

/// T exact Bellman applications to the zero table.
ValueTable truncated_vstar(const Mdp& mdp, std::size_t horizon);

// JSON with fields {n_states, n_actions, gamma, transitions: [[s,a,s',p]...],
// rewards: [[s,a,r]...]} in canonical (s, a, s') order.
std::string mdp_to_json(const Mdp& mdp);
Mdp mdp_from_json(const std::string& text, const std::string& source = "<mdp>");
void save_mdp(const Mdp& mdp, const std::string& path);
Mdp load_mdp(const std::string& path);

}  // namespace dpsim

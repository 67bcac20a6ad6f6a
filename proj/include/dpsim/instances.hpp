#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dpsim/depgraph.hpp"
#include "dpsim/mdp.hpp"

namespace dpsim {

enum class TopologyKind { ring, grid, star, expander, path, tree };

std::string to_string(TopologyKind kind);
TopologyKind topology_from_string(const std::string& s);

struct TopologySpec {
  TopologyKind kind = TopologyKind::ring;
  std::size_t machines = 0;
  std::size_t expander_degree = 4;
  /// Tree only; machines is derived from depth and branching.
  std::size_t tree_depth = 0;
  std::size_t branching = 2;
  std::uint64_t seed = 0;

  /// Throws ContractViolation on infeasible parameters.
  void validate() const;
  std::size_t machine_count() const;
};

using Edge = std::pair<MachineId, MachineId>;

/// Undirected edge list (j < k), sorted. Expanders are random regular graphs
/// from the pairing model, resampled until simple and connected.
std::vector<Edge> topology_edges(const TopologySpec& spec);

struct RandomMdpParams {
  std::size_t states_per_machine = 4;
  std::size_t actions = 2;
  /// Successors drawn inside the owning machine per (s, a).
  std::size_t internal_successors = 2;
  /// Cross transitions per directed topology edge.
  std::size_t cross_per_edge = 3;
  double gamma = 0.95;
};

struct TopologyInstance {
  TopologySpec spec;
  std::vector<Edge> edges;
  Mdp mdp;
  ShardedDataset data;
};

/// Random MDP with contiguous ownership whose cross-machine transitions
/// realize exactly the topology's edges. Probabilities are uniform(0.1, 1)
/// weights normalized per row; rewards uniform in [0, 1].
TopologyInstance gen_topology_mdp(const TopologySpec& spec, const RandomMdpParams& params,
                                  std::uint64_t seed);

/// A family of MDPs on a shared ownership map and dependency support.
struct HardInstance {
  std::vector<Mdp> members;
  /// Bit vector defining each member (empty for the two-point family).
  std::vector<std::vector<bool>> labels;
  std::vector<MachineId> ownership;
  std::size_t n_machines = 0;
  /// Learner machine and the machine holding the informative rewards.
  MachineId u = 0;
  MachineId v = 0;
  std::size_t depth = 0;
  std::size_t width = 1;
  double gamma = 0.0;
  /// Probe states x0^(q) on machine u, one per chain.
  std::vector<StateId> probes;
  /// Machines along the loaded path from u to v.
  std::vector<MachineId> path;

  ShardedDataset dataset(std::size_t member) const;
};

/// Two chains x0..xL over a path of L + 1 machines, deterministic forward
/// moves and a terminal self-loop; member 0 has zero rewards, member 1 pays
/// 1 - gamma at xL. `decoy` adds a second zero-reward action with the same
/// dynamics.
HardInstance gen_thm1_pair(std::size_t length, double gamma, bool decoy = false);

/// m parallel chains over a path of L + 1 machines; chain q pays
/// (1 - gamma) b_q at its last state. State x_l^(q) has index l * m + q.
HardInstance gen_thm2_family(std::size_t length, std::size_t width, double gamma,
                             const std::vector<bool>& bits);

/// Every b in {0,1}^m, in counting order (bit q of the index is b_q).
HardInstance gen_thm2_all(std::size_t length, std::size_t width, double gamma);

/// Complete tree of the given depth and branching. The chains of
/// gen_thm2_family run along the leftmost root-to-leaf path; with branching
/// > 1 every machine also owns a zero-reward filler state that moves
/// uniformly to its children's fillers (self-loop at leaves).
HardInstance gen_fed_tree(std::size_t depth, std::size_t branching, std::size_t width,
                          double gamma, const std::vector<bool>& bits);

}  // namespace dpsim

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dpsim/error.hpp"
#include "dpsim/mdp.hpp"

namespace dpsim {

struct DataTransition {
  StateId state;
  ActionId action;
  double reward;
  StateId next;

  bool operator==(const DataTransition&) const = default;
};

/// Offline transitions split across machines, plus the state-ownership map.
/// A transition lives in the shard of the machine that owns its source state.
class ShardedDataset {
 public:
  ShardedDataset(std::size_t n_machines, std::vector<MachineId> ownership,
                 std::vector<std::vector<DataTransition>> shards);

  /// One transition per (s, a, s') with positive probability, placed in the
  /// shard of owner(s).
  static ShardedDataset from_mdp(const Mdp& mdp, std::vector<MachineId> ownership,
                                 std::size_t n_machines);

  std::size_t n_machines() const noexcept { return shards_.size(); }
  std::size_t n_states() const noexcept { return ownership_.size(); }
  MachineId owner(StateId s) const { return ownership_.at(s); }
  const std::vector<MachineId>& ownership() const noexcept { return ownership_; }
  std::span<const StateId> owned_states(MachineId j) const { return owned_[j]; }
  std::span<const DataTransition> shard(MachineId j) const { return shards_[j]; }

  /// Throws ContractViolation unless the shards enumerate exactly the
  /// support and rewards of `mdp`.
  void check_consistent(const Mdp& mdp) const;

 private:
  std::vector<MachineId> ownership_;
  std::vector<std::vector<StateId>> owned_;
  std::vector<std::vector<DataTransition>> shards_;
};

// Partition file: one "state machine" pair per line.
void save_partition(const ShardedDataset& data, const std::string& path);
std::vector<MachineId> load_partition(const std::string& path);

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

struct DirectedEdge {
  MachineId from;
  MachineId to;
  std::uint64_t weight;
};

/// Machine-level empirical transition graph.
///
/// Directed edge (j, k) carries w(j, k) = #transitions in shard j landing in
/// states of k, and boundary(j, k) is the set of k's states that j needs.
/// Distances and diameter use the undirected support.
class DepGraph {
 public:
  std::size_t n_machines() const noexcept { return neighbors_.size(); }
  const std::vector<DirectedEdge>& directed_edges() const noexcept { return edges_; }
  std::uint64_t weight(MachineId j, MachineId k) const;
  /// States owned by k whose values machine j consumes.
  std::span<const StateId> boundary(MachineId j, MachineId k) const;
  std::span<const MachineId> neighbors(MachineId j) const { return neighbors_[j]; }
  bool adjacent(MachineId j, MachineId k) const;
  std::size_t degree(MachineId j) const { return neighbors_[j].size(); }
  std::size_t undirected_edge_count() const;

  std::size_t distance(MachineId j, MachineId k) const { return dist_[j][k]; }
  std::size_t diameter() const noexcept { return diameter_; }
  bool connected() const noexcept { return components_.size() <= 1; }
  const std::vector<std::vector<MachineId>>& components() const noexcept { return components_; }
  /// Machines within undirected distance `radius` of `center`.
  std::vector<MachineId> ball(MachineId center, std::size_t radius) const;

  /// Stable digest of the undirected support (equal across a hard family).
  std::uint64_t support_fingerprint() const;

  /// Edge-list text, one "j k weight" line per directed edge.
  std::string edge_list() const;

  /// Support-only graph (unit weights, no boundary sets) from an edge list.
  static DepGraph from_undirected_edges(std::size_t n_machines,
                                        const std::vector<std::pair<MachineId, MachineId>>& edges);

 private:
  friend DepGraph build_depgraph(const ShardedDataset& data);
  void finalize();

  std::vector<DirectedEdge> edges_;
  std::map<std::pair<MachineId, MachineId>, std::vector<StateId>> boundary_;
  std::vector<std::vector<MachineId>> neighbors_;
  std::vector<std::vector<std::size_t>> dist_;
  std::vector<std::vector<MachineId>> components_;
  std::size_t diameter_ = 0;
};

DepGraph build_depgraph(const ShardedDataset& data);

/// Largest L >= 0 with gamma^L > 2 epsilon, by direct scan of the strict
/// inequality. Requires gamma in (0, 1), epsilon in (0, 1/2).
std::size_t discounted_radius(double gamma, double epsilon);

enum class Laziness { lazy_half };

/// Symmetric doubly stochastic matrix with its spectrum sorted descending.
class MixingMatrix {
 public:
  MixingMatrix(Eigen::MatrixXd w);

  /// Uniform averaging, W = 11^T / M.
  static MixingMatrix complete(std::size_t m);

  std::size_t size() const noexcept { return static_cast<std::size_t>(w_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return w_; }
  double operator()(std::size_t i, std::size_t j) const { return w_(i, j); }
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  /// 1 - |lambda_2|; 1 for a single machine.
  double gap() const noexcept { return gap_; }

  struct RowEntry {
    MachineId col;
    double weight;
  };
  /// Nonzero entries of row j in column order.
  std::span<const RowEntry> row(MachineId j) const { return rows_[j]; }

 private:
  Eigen::MatrixXd w_;
  std::vector<double> eigenvalues_;
  std::vector<std::vector<RowEntry>> rows_;
  double gap_ = 1.0;
};

class DisconnectedGraph : public ContractViolation {
 public:
  DisconnectedGraph(std::vector<std::vector<MachineId>> components);
  const std::vector<std::vector<MachineId>>& components() const noexcept { return components_; }

 private:
  std::vector<std::vector<MachineId>> components_;
};

/// Lazy Metropolis-Hastings weights W_ij = 1 / (2 max(d_i, d_j)) on the
/// undirected support, diagonal = 1 - row sum.
MixingMatrix mh_matrix(const DepGraph& g, Laziness laziness = Laziness::lazy_half);

double spectral_gap(const MixingMatrix& w);

enum class ConductanceMode { graph_volume, mixing_weight };

struct CutResult {
  double value = 0.0;
  /// True when every nonempty proper subset was examined.
  bool exhaustive = false;
  std::vector<bool> side;
};

/// graph_volume: |cut edges| / min(vol S, vol S^c) on the support graph.
/// mixing_weight: sum_{i in S, j notin S} W_ij / (min(|S|, |S^c|) / M).
/// Minimized exhaustively for M <= 20, otherwise over sweep cuts of the
/// second eigenvector (normalized Laplacian resp. W), which is an upper bound.
CutResult conductance_sweep(const DepGraph& g, ConductanceMode mode);
CutResult conductance_sweep(const MixingMatrix& w);

inline constexpr std::size_t kExhaustiveCutLimit = 20;

/// Second-smallest eigenvalue of the normalized Laplacian of the support.
double normalized_laplacian_gap(const DepGraph& g);

/// Cheeger-type comparisons between cut ratios and spectral gaps.
struct CheegerReport {
  double phi_graph = 0.0;     ///< graph_volume conductance
  double phi_w = 0.0;         ///< conductance of W under uniform stationary measure
  double phi_mixing = 0.0;     ///< mixing_weight ratio (= M * phi_w)
  double laplacian_gap = 0.0; ///< lambda_2 of normalized Laplacian
  double gap_w = 0.0;         ///< 1 - |lambda_2(W)|
  bool exhaustive = false;
  bool laplacian_sandwich = false;  ///< phi_graph^2/2 <= laplacian_gap <= 2 phi_graph
  bool mh_sandwich = false;         ///< phi_w^2/2 <= gap_w <= 2 phi_w
  bool graph_vs_mh_sandwich = false;///< phi_graph^2/2 <= gap_w <= 2 phi_graph
  std::string note;
};

CheegerReport cheeger_report(const DepGraph& g, const MixingMatrix& w);

/// JSON {M, diameter, gap, phi_graph, phi_mixing, eigenvalues}.
std::string graph_report_json(const DepGraph& g, const MixingMatrix& w);

}  // namespace dpsim

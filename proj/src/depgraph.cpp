#include "dpsim/depgraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "detail/mix.hpp"

namespace dpsim {

ShardedDataset::ShardedDataset(std::size_t n_machines, std::vector<MachineId> ownership,
                               std::vector<std::vector<DataTransition>> shards)
    : ownership_(std::move(ownership)), owned_(n_machines), shards_(std::move(shards)) {
  if (n_machines == 0) throw ContractViolation("ShardedDataset: need at least one machine");
  if (shards_.size() != n_machines) {
    throw ContractViolation("ShardedDataset: shard count differs from machine count");
  }
  for (StateId s = 0; s < ownership_.size(); ++s) {
    if (ownership_[s] >= n_machines) {
      throw ContractViolation(fmt::format("ShardedDataset: state {} owned by unknown machine {}", s,
                                          ownership_[s]));
    }
    owned_[ownership_[s]].push_back(s);
  }
  for (MachineId j = 0; j < n_machines; ++j) {
    for (const auto& t : shards_[j]) {
      if (t.state >= ownership_.size() || t.next >= ownership_.size()) {
        throw ContractViolation(
            fmt::format("ShardedDataset: transition in shard {} references unowned state", j));
      }
      if (ownership_[t.state] != j) {
        throw ContractViolation(fmt::format(
            "ShardedDataset: shard {} holds a transition from state {} owned by machine {}", j,
            t.state, ownership_[t.state]));
      }
    }
  }
}

ShardedDataset ShardedDataset::from_mdp(const Mdp& mdp, std::vector<MachineId> ownership,
                                        std::size_t n_machines) {
  if (ownership.size() != mdp.n_states()) {
    throw ContractViolation("ShardedDataset::from_mdp: ownership must cover every state");
  }
  std::vector<std::vector<DataTransition>> shards(n_machines);
  for (StateId s = 0; s < mdp.n_states(); ++s) {
    if (ownership[s] >= n_machines) {
      throw ContractViolation(fmt::format("state {} owned by unknown machine {}", s, ownership[s]));
    }
    for (ActionId a = 0; a < mdp.n_actions(); ++a) {
      for (const Successor& succ : mdp.successors(s, a)) {
        shards[ownership[s]].push_back({s, a, mdp.reward(s, a), succ.next});
      }
    }
  }
  return ShardedDataset(n_machines, std::move(ownership), std::move(shards));
}

void ShardedDataset::check_consistent(const Mdp& mdp) const {
  if (mdp.n_states() != n_states()) {
    throw ContractViolation(fmt::format("dataset covers {} states, MDP has {}", n_states(),
                                        mdp.n_states()));
  }
  std::size_t support = 0;
  for (StateId s = 0; s < mdp.n_states(); ++s) {
    for (ActionId a = 0; a < mdp.n_actions(); ++a) support += mdp.successors(s, a).size();
  }
  std::size_t count = 0;
  for (MachineId j = 0; j < n_machines(); ++j) {
    for (const auto& t : shards_[j]) {
      ++count;
      if (t.action >= mdp.n_actions() || mdp.reward(t.state, t.action) != t.reward) {
        throw ContractViolation(fmt::format("dataset transition from state {} disagrees with MDP",
                                            t.state));
      }
      const auto succ = mdp.successors(t.state, t.action);
      const bool found = std::any_of(succ.begin(), succ.end(),
                                     [&](const Successor& x) { return x.next == t.next; });
      if (!found) {
        throw ContractViolation(fmt::format("dataset transition {}->{} not in MDP support", t.state,
                                            t.next));
      }
    }
  }
  if (count != support) {
    throw ContractViolation(
        fmt::format("dataset has {} transitions, MDP support has {}", count, support));
  }
}

void save_partition(const ShardedDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (StateId s = 0; s < data.n_states(); ++s) out << s << ' ' << data.owner(s) << '\n';
}

std::vector<MachineId> load_partition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  std::vector<std::pair<StateId, MachineId>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    long long s = -1, m = -1;
    std::string rest;
    if (!(ls >> s >> m) || s < 0 || m < 0 || (ls >> rest)) {
      throw ParseError(fmt::format("{}:{}", path, line_no), "expected 'state machine'");
    }
    rows.emplace_back(static_cast<StateId>(s), static_cast<MachineId>(m));
  }
  std::vector<MachineId> ownership(rows.size(), 0);
  std::vector<bool> seen(rows.size(), false);
  for (const auto& [s, m] : rows) {
    if (s >= rows.size() || seen[s]) {
      throw ParseError(path, fmt::format("state {} missing, repeated or out of range", s));
    }
    seen[s] = true;
    ownership[s] = m;
  }
  return ownership;
}

// DepGraph ------------------------------------------------------------------

std::uint64_t DepGraph::weight(MachineId j, MachineId k) const {
  for (const auto& e : edges_) {
    if (e.from == j && e.to == k) return e.weight;
  }
  return 0;
}

std::span<const StateId> DepGraph::boundary(MachineId j, MachineId k) const {
  auto it = boundary_.find({j, k});
  if (it == boundary_.end()) return {};
  return it->second;
}

bool DepGraph::adjacent(MachineId j, MachineId k) const {
  const auto& nb = neighbors_[j];
  return std::binary_search(nb.begin(), nb.end(), k);
}

std::size_t DepGraph::undirected_edge_count() const {
  std::size_t total = 0;
  for (const auto& nb : neighbors_) total += nb.size();
  return total / 2;
}

std::vector<MachineId> DepGraph::ball(MachineId center, std::size_t radius) const {
  std::vector<MachineId> out;
  for (MachineId k = 0; k < n_machines(); ++k) {
    if (dist_[center][k] != kUnreachable && dist_[center][k] <= radius) out.push_back(k);
  }
  return out;
}

std::uint64_t DepGraph::support_fingerprint() const {
  std::uint64_t h = detail::mix64(n_machines());
  for (MachineId j = 0; j < n_machines(); ++j) {
    for (MachineId k : neighbors_[j]) {
      if (j < k) h = detail::mix64(h ^ detail::mix_keys({j, k}));
    }
  }
  return h;
}

std::string DepGraph::edge_list() const {
  std::string out;
  for (const auto& e : edges_) out += fmt::format("{} {} {}\n", e.from, e.to, e.weight);
  return out;
}

void DepGraph::finalize() {
  const std::size_t m = neighbors_.size();
  for (auto& nb : neighbors_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  std::sort(edges_.begin(), edges_.end(), [](const DirectedEdge& a, const DirectedEdge& b) {
    return std::pair(a.from, a.to) < std::pair(b.from, b.to);
  });
  dist_.assign(m, std::vector<std::size_t>(m, kUnreachable));
  components_.clear();
  std::vector<bool> assigned(m, false);
  diameter_ = 0;
  for (MachineId src = 0; src < m; ++src) {
    auto& d = dist_[src];
    std::deque<MachineId> queue{src};
    d[src] = 0;
    while (!queue.empty()) {
      const MachineId u = queue.front();
      queue.pop_front();
      for (MachineId v : neighbors_[u]) {
        if (d[v] == kUnreachable) {
          d[v] = d[u] + 1;
          queue.push_back(v);
        }
      }
    }
    if (!assigned[src]) {
      std::vector<MachineId> comp;
      for (MachineId k = 0; k < m; ++k) {
        if (d[k] != kUnreachable) {
          comp.push_back(k);
          assigned[k] = true;
        }
      }
      components_.push_back(std::move(comp));
    }
    for (std::size_t x : d) {
      if (x != kUnreachable) diameter_ = std::max(diameter_, x);
    }
  }
}

DepGraph DepGraph::from_undirected_edges(std::size_t n_machines,
                                         const std::vector<std::pair<MachineId, MachineId>>& edges) {
  DepGraph g;
  g.neighbors_.assign(n_machines, {});
  for (auto [a, b] : edges) {
    if (a >= n_machines || b >= n_machines || a == b) {
      throw ContractViolation(fmt::format("invalid undirected edge ({}, {})", a, b));
    }
    g.neighbors_[a].push_back(b);
    g.neighbors_[b].push_back(a);
    g.edges_.push_back({a, b, 1});
    g.edges_.push_back({b, a, 1});
  }
  g.finalize();
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end(),
                             [](const DirectedEdge& x, const DirectedEdge& y) {
                               return x.from == y.from && x.to == y.to;
                             }),
                 g.edges_.end());
  return g;
}

DepGraph build_depgraph(const ShardedDataset& data) {
  const std::size_t m = data.n_machines();
  DepGraph g;
  g.neighbors_.assign(m, {});
  std::map<std::pair<MachineId, MachineId>, std::uint64_t> weights;
  std::map<std::pair<MachineId, MachineId>, std::set<StateId>> boundary;
  for (MachineId j = 0; j < m; ++j) {
    for (const auto& t : data.shard(j)) {
      const MachineId k = data.owner(t.next);
      if (k == j) continue;
      ++weights[{j, k}];
      boundary[{j, k}].insert(t.next);
    }
  }
  for (const auto& [key, w] : weights) {
    g.edges_.push_back({key.first, key.second, w});
    g.neighbors_[key.first].push_back(key.second);
    g.neighbors_[key.second].push_back(key.first);
  }
  for (auto& [key, states] : boundary) {
    g.boundary_[key] = std::vector<StateId>(states.begin(), states.end());
  }
  g.finalize();
  return g;
}

std::size_t discounted_radius(double gamma, double epsilon) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ContractViolation(fmt::format("discounted_radius: gamma {} outside (0, 1)", gamma));
  }
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw ContractViolation(fmt::format("discounted_radius: epsilon {} outside (0, 1/2)", epsilon));
  }
  const double threshold = 2.0 * epsilon;
  std::size_t radius = 0;
  while (std::pow(gamma, static_cast<double>(radius + 1)) > threshold) ++radius;
  return radius;
}

}  // namespace dpsim

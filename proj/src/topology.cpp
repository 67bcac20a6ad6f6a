#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <set>

#include <fmt/format.h>

#include "dpsim/instances.hpp"

namespace dpsim {

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::ring: return "ring";
    case TopologyKind::grid: return "grid";
    case TopologyKind::star: return "star";
    case TopologyKind::expander: return "expander";
    case TopologyKind::path: return "path";
    case TopologyKind::tree: return "tree";
  }
  return "unknown";
}

TopologyKind topology_from_string(const std::string& s) {
  for (auto k : {TopologyKind::ring, TopologyKind::grid, TopologyKind::star, TopologyKind::expander,
                 TopologyKind::path, TopologyKind::tree}) {
    if (to_string(k) == s) return k;
  }
  throw ContractViolation(fmt::format("unknown topology '{}'", s));
}

namespace {

std::size_t grid_side(std::size_t m) {
  auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(m))));
  return side * side == m ? side : 0;
}

bool connected(std::size_t m, const std::vector<Edge>& edges) {
  std::vector<std::vector<MachineId>> adj(m);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(m, false);
  std::queue<MachineId> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    const MachineId x = q.front();
    q.pop();
    for (MachineId y : adj[x]) {
      if (!seen[y]) {
        seen[y] = true;
        ++count;
        q.push(y);
      }
    }
  }
  return count == m;
}

std::vector<Edge> random_regular(std::size_t m, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<MachineId> points(m * d);
  for (std::size_t i = 0; i < points.size(); ++i) points[i] = static_cast<MachineId>(i / d);
  for (std::size_t attempt = 0; attempt < 100000; ++attempt) {
    std::shuffle(points.begin(), points.end(), rng);
    std::set<Edge> edges;
    bool simple = true;
    for (std::size_t i = 0; simple && i < points.size(); i += 2) {
      MachineId a = points[i], b = points[i + 1];
      if (a == b) {
        simple = false;
        break;
      }
      if (a > b) std::swap(a, b);
      simple = edges.insert({a, b}).second;
    }
    if (!simple) continue;
    std::vector<Edge> out(edges.begin(), edges.end());
    if (connected(m, out)) return out;
  }
  throw ContractViolation(fmt::format("no connected simple {}-regular graph on {} vertices found", d, m));
}

}  // namespace

std::size_t TopologySpec::machine_count() const {
  if (kind != TopologyKind::tree) return machines;
  if (branching == 1) return tree_depth + 1;
  std::size_t total = 0, level = 1;
  for (std::size_t l = 0; l <= tree_depth; ++l) {
    total += level;
    level *= branching;
  }
  return total;
}

void TopologySpec::validate() const {
  switch (kind) {
    case TopologyKind::ring:
      if (machines < 3) throw ContractViolation("ring needs at least 3 machines");
      break;
    case TopologyKind::grid:
      if (machines == 0 || grid_side(machines) == 0) {
        throw ContractViolation(fmt::format("grid needs a perfect-square machine count, got {}", machines));
      }
      break;
    case TopologyKind::star:
      if (machines < 2) throw ContractViolation("star needs at least 2 machines");
      break;
    case TopologyKind::expander:
      if (expander_degree < 1 || machines <= expander_degree || (machines * expander_degree) % 2 != 0) {
        throw ContractViolation(fmt::format("no {}-regular graph on {} machines", expander_degree, machines));
      }
      break;
    case TopologyKind::path:
      if (machines < 1) throw ContractViolation("path needs at least 1 machine");
      break;
    case TopologyKind::tree:
      if (tree_depth < 1 || branching < 1) throw ContractViolation("tree needs depth >= 1 and branching >= 1");
      break;
  }
}

std::vector<Edge> topology_edges(const TopologySpec& spec) {
  spec.validate();
  const std::size_t m = spec.machine_count();
  std::vector<Edge> edges;
  auto add = [&edges](std::size_t a, std::size_t b) {
    edges.emplace_back(static_cast<MachineId>(std::min(a, b)), static_cast<MachineId>(std::max(a, b)));
  };
  switch (spec.kind) {
    case TopologyKind::ring:
      for (std::size_t i = 0; i < m; ++i) add(i, (i + 1) % m);
      break;
    case TopologyKind::grid: {
      const std::size_t side = grid_side(m);
      for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
          if (c + 1 < side) add(r * side + c, r * side + c + 1);
          if (r + 1 < side) add(r * side + c, (r + 1) * side + c);
        }
      }
      break;
    }
    case TopologyKind::star:
      for (std::size_t i = 1; i < m; ++i) add(0, i);
      break;
    case TopologyKind::expander:
      edges = random_regular(m, spec.expander_degree, spec.seed);
      break;
    case TopologyKind::path:
      for (std::size_t i = 0; i + 1 < m; ++i) add(i, i + 1);
      break;
    case TopologyKind::tree:
      for (std::size_t i = 1; i < m; ++i) add((i - 1) / spec.branching, i);
      break;
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

TopologyInstance gen_topology_mdp(const TopologySpec& spec, const RandomMdpParams& params,
                                  std::uint64_t seed) {
  if (params.states_per_machine < 1 || params.actions < 1 || params.internal_successors < 1) {
    throw ContractViolation("random MDP needs states, actions and successors per row");
  }
  if (params.cross_per_edge < 1) {
    throw ContractViolation("cross_per_edge must be at least 1 to realize the topology");
  }
  const auto edges = topology_edges(spec);
  const std::size_t m = spec.machine_count();
  const std::size_t spm = params.states_per_machine;
  const std::size_t n = m * spm;
  const std::size_t na = params.actions;

  std::mt19937_64 rng(seed);
  auto state_in = [&](std::size_t machine) {
    return static_cast<StateId>(machine * spm + std::uniform_int_distribution<std::size_t>(0, spm - 1)(rng));
  };

  std::vector<std::set<StateId>> succ(n * na);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t i = 0; i < params.internal_successors; ++i) succ[s * na + a].insert(state_in(s / spm));
    }
  }
  for (auto [u, v] : edges) {
    for (auto [j, k] : {Edge{u, v}, Edge{v, u}}) {
      for (std::size_t i = 0; i < params.cross_per_edge; ++i) {
        const StateId s = state_in(j);
        const auto a = std::uniform_int_distribution<std::size_t>(0, na - 1)(rng);
        succ[s * na + a].insert(state_in(k));
      }
    }
  }

  std::uniform_real_distribution<double> weight(0.1, 1.0);
  std::vector<std::vector<Successor>> rows(n * na);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> w;
    for (std::size_t k = 0; k < succ[i].size(); ++k) w.push_back(weight(rng));
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    std::size_t k = 0;
    for (StateId t : succ[i]) rows[i].push_back({t, w[k++] / total});
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> rewards(n * na);
  for (double& r : rewards) r = unit(rng);

  Mdp mdp(n, na, params.gamma, std::move(rows), std::move(rewards));
  std::vector<MachineId> ownership(n);
  for (std::size_t s = 0; s < n; ++s) ownership[s] = static_cast<MachineId>(s / spm);
  auto data = ShardedDataset::from_mdp(mdp, ownership, m);
  return {spec, edges, std::move(mdp), std::move(data)};
}

}  // namespace dpsim

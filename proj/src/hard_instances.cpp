#include <fmt/format.h>

#include "dpsim/instances.hpp"

namespace dpsim {

ShardedDataset HardInstance::dataset(std::size_t member) const {
  return ShardedDataset::from_mdp(members.at(member), ownership, n_machines);
}

HardInstance gen_thm1_pair(std::size_t length, double gamma, bool decoy) {
  if (length < 1) throw ContractViolation("chain length must be at least 1");
  const std::size_t n = length + 1;
  const std::size_t na = decoy ? 2 : 1;
  std::vector<std::vector<Successor>> rows(n * na);
  for (std::size_t l = 0; l < n; ++l) {
    const auto next = static_cast<StateId>(l + 1 < n ? l + 1 : l);
    for (std::size_t a = 0; a < na; ++a) rows[l * na + a] = {{next, 1.0}};
  }
  std::vector<double> zero(n * na, 0.0), paying(n * na, 0.0);
  paying[length * na] = 1.0 - gamma;

  HardInstance h;
  h.members.emplace_back(n, na, gamma, rows, zero);
  h.members.emplace_back(n, na, gamma, rows, paying);
  h.ownership.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    h.ownership[l] = static_cast<MachineId>(l);
    h.path.push_back(static_cast<MachineId>(l));
  }
  h.n_machines = n;
  h.u = 0;
  h.v = static_cast<MachineId>(length);
  h.depth = length;
  h.width = 1;
  h.gamma = gamma;
  h.probes = {0};
  return h;
}

namespace {

// Chain states occupy indices l * m + q; filler states (branching > 1)
// follow, one per machine.
HardInstance build_tree(std::size_t depth, std::size_t branching, std::size_t width, double gamma,
                        const std::vector<std::vector<bool>>& labels) {
  if (depth < 1 || width < 1 || branching < 1) {
    throw ContractViolation("depth, width and branching must be at least 1");
  }
  TopologySpec spec;
  spec.kind = TopologyKind::tree;
  spec.tree_depth = depth;
  spec.branching = branching;
  const std::size_t machines = spec.machine_count();
  const bool fillers = branching > 1;
  const std::size_t chain_states = (depth + 1) * width;
  const std::size_t n = chain_states + (fillers ? machines : 0);

  HardInstance h;
  h.n_machines = machines;
  h.depth = depth;
  h.width = width;
  h.gamma = gamma;
  MachineId node = 0;
  for (std::size_t l = 0; l <= depth; ++l) {
    h.path.push_back(node);
    node = static_cast<MachineId>(node * branching + 1);
  }
  h.u = h.path.front();
  h.v = h.path.back();
  for (std::size_t q = 0; q < width; ++q) h.probes.push_back(static_cast<StateId>(q));

  h.ownership.resize(n);
  std::vector<std::vector<Successor>> rows(n);
  for (std::size_t l = 0; l <= depth; ++l) {
    for (std::size_t q = 0; q < width; ++q) {
      const std::size_t s = l * width + q;
      h.ownership[s] = h.path[l];
      const auto next = static_cast<StateId>(l < depth ? s + width : s);
      rows[s] = {{next, 1.0}};
    }
  }
  if (fillers) {
    for (std::size_t i = 0; i < machines; ++i) {
      const std::size_t s = chain_states + i;
      h.ownership[s] = static_cast<MachineId>(i);
      const std::size_t first_child = i * branching + 1;
      if (first_child >= machines) {
        rows[s] = {{static_cast<StateId>(s), 1.0}};
      } else {
        for (std::size_t c = 0; c < branching; ++c) {
          rows[s].push_back({static_cast<StateId>(chain_states + first_child + c), 1.0 / branching});
        }
      }
    }
  }
  for (const auto& bits : labels) {
    if (bits.size() != width) {
      throw ContractViolation(fmt::format("bit vector has length {}, expected {}", bits.size(), width));
    }
    std::vector<double> rewards(n, 0.0);
    for (std::size_t q = 0; q < width; ++q) {
      if (bits[q]) rewards[depth * width + q] = 1.0 - gamma;
    }
    h.members.emplace_back(n, 1, gamma, rows, std::move(rewards));
    h.labels.push_back(bits);
  }
  return h;
}

}  // namespace

HardInstance gen_thm2_family(std::size_t length, std::size_t width, double gamma,
                             const std::vector<bool>& bits) {
  return build_tree(length, 1, width, gamma, {bits});
}

HardInstance gen_thm2_all(std::size_t length, std::size_t width, double gamma) {
  if (width >= 24) throw ContractViolation("family too large to enumerate");
  std::vector<std::vector<bool>> labels;
  for (std::size_t code = 0; code < (std::size_t{1} << width); ++code) {
    std::vector<bool> bits(width);
    for (std::size_t q = 0; q < width; ++q) bits[q] = (code >> q) & 1U;
    labels.push_back(std::move(bits));
  }
  return build_tree(length, 1, width, gamma, labels);
}

HardInstance gen_fed_tree(std::size_t depth, std::size_t branching, std::size_t width,
                          double gamma, const std::vector<bool>& bits) {
  return build_tree(depth, branching, width, gamma, {bits});
}

}  // namespace dpsim

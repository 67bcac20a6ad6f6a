#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "dpsim/harness.hpp"

namespace dpsim {

std::string AnalyzeReport::to_text() const {
  std::string out;
  out += fmt::format("machines            {}\n", machines);
  out += fmt::format("diameter            {}\n", diameter);
  out += fmt::format("phi (graph volume)  {:.4f}{}\n", phi_graph, phi_exhaustive ? "" : " (sweep cut)");
  out += fmt::format("phi (W, uniform)    {:.4f}\n", phi_mixing);
  out += fmt::format("gap(W) lazy MH      {:.6f}\n", gap);
  out += fmt::format("laplacian gap       {:.6f}\n", cheeger.laplacian_gap);
  out += fmt::format("L_eps (gamma={}, eps={})  {}\n", gamma, epsilon, l_eps);
  out += fmt::format("rounds, direct      {}\n", direct_rounds);
  out += fmt::format("rounds, async D={}   {}\n", delay, async_rounds);
  out += fmt::format("rounds, gossip      {}\n",
                     gossip_rounds ? fmt::format("{}", *gossip_rounds) : std::string("unbounded (gap 0)"));
  out += fmt::format("lower bound         {} rounds (min of diameter and L_eps)\n", std::min(diameter, l_eps));
  if (!cheeger.note.empty()) out += "note: " + cheeger.note + "\n";
  return out;
}

std::string AnalyzeReport::to_json() const {
  nlohmann::ordered_json j;
  j["M"] = machines;
  j["diameter"] = diameter;
  j["phi_graph"] = phi_graph;
  j["phi_mixing"] = phi_mixing;
  j["phi_exhaustive"] = phi_exhaustive;
  j["gap"] = gap;
  j["laplacian_gap"] = cheeger.laplacian_gap;
  j["gamma"] = gamma;
  j["epsilon"] = epsilon;
  j["L_eps"] = l_eps;
  j["delay"] = delay;
  j["rounds_direct"] = direct_rounds;
  j["rounds_async"] = async_rounds;
  j["rounds_gossip"] = gossip_rounds ? nlohmann::ordered_json(*gossip_rounds) : nlohmann::ordered_json(nullptr);
  j["note"] = cheeger.note;
  return j.dump(2) + "\n";
}

AnalyzeReport cmd_analyze(const Mdp& mdp, const ShardedDataset& data, double epsilon, std::uint64_t delay) {
  data.check_consistent(mdp);
  const DepGraph g = build_depgraph(data);
  const MixingMatrix w = mh_matrix(g);
  AnalyzeReport r;
  r.machines = g.n_machines();
  r.diameter = g.diameter();
  r.cheeger = cheeger_report(g, w);
  r.phi_graph = r.cheeger.phi_graph;
  r.phi_mixing = r.cheeger.phi_mixing;
  r.phi_exhaustive = r.cheeger.exhaustive;
  r.gap = w.gap();
  r.gamma = mdp.gamma();
  r.epsilon = epsilon;
  r.l_eps = discounted_radius(r.gamma, epsilon);
  r.delay = delay;
  // Sufficient rounds so that gamma^T / (1 - gamma) <= eps.
  const double log_inv_gamma = std::log(1.0 / r.gamma);
  r.direct_rounds = static_cast<std::uint64_t>(std::ceil(std::log(1.0 / ((1.0 - r.gamma) * epsilon)) / log_inv_gamma));
  r.async_rounds = delay * r.direct_rounds;
  // Potential B_0 <= 1 / (1 - gamma) from the zero start, contracting at rho.
  const double rho = 1.0 - (1.0 - r.gamma) * r.gap / 8.0;
  if (rho < 1.0) {
    const double b0 = 1.0 / (1.0 - r.gamma);
    r.gossip_rounds = static_cast<std::uint64_t>(std::ceil(std::log(b0 / epsilon) / -std::log(rho)));
  }
  return r;
}

AnalyzeReport cmd_analyze_files(const std::string& mdp_path, const std::string& partition_path,
                                double epsilon, std::uint64_t delay) {
  const Mdp mdp = load_mdp(mdp_path);
  auto ownership = load_partition(partition_path);
  if (ownership.size() != mdp.n_states()) {
    throw ParseError(partition_path, fmt::format("partition lists {} states, MDP has {}", ownership.size(),
                                                 mdp.n_states()));
  }
  std::size_t machines = 0;
  for (MachineId j : ownership) machines = std::max<std::size_t>(machines, j + 1);
  const auto data = ShardedDataset::from_mdp(mdp, std::move(ownership), machines);
  return cmd_analyze(mdp, data, epsilon, delay);
}

}  // namespace dpsim

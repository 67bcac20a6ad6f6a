#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dpsim/harness.hpp"
#include "dpsim/instances.hpp"

using namespace dpsim;

namespace {

TopologySpec parse_topology(const std::string& text) {
  // kind:M, or tree:depth:branching
  TopologySpec spec;
  const auto colon = text.find(':');
  spec.kind = topology_from_string(text.substr(0, colon));
  if (colon == std::string::npos) throw ContractViolation(fmt::format("topology '{}' needs a size", text));
  const std::string rest = text.substr(colon + 1);
  if (spec.kind == TopologyKind::tree) {
    const auto c2 = rest.find(':');
    spec.tree_depth = std::stoul(rest.substr(0, c2));
    if (c2 != std::string::npos) spec.branching = std::stoul(rest.substr(c2 + 1));
  } else {
    spec.machines = std::stoul(rest);
  }
  spec.validate();
  return spec;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", p.string()));
  out << text;
}

std::vector<bool> parse_bits(const std::string& s) {
  std::vector<bool> bits;
  for (char c : s) {
    if (c != '0' && c != '1') throw ContractViolation(fmt::format("bit string '{}' must be 0/1", s));
    bits.push_back(c == '1');
  }
  return bits;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed value iteration simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment matrix");
  std::string config_path;
  std::vector<std::string> topologies, algorithms;
  std::vector<std::uint64_t> seeds;
  std::optional<double> gamma, epsilon, delta;
  std::optional<std::string> noise_mode, schedule, output;
  std::optional<std::uint64_t> budget, delay, bandwidth;
  std::optional<unsigned> width;
  std::optional<std::size_t> workers, spm;
  run->add_option("-c,--config", config_path, "YAML experiment config");
  run->add_option("--topology", topologies, "kind:M or tree:depth:branching (repeatable)");
  run->add_option("--algorithm", algorithms, "sdbp, broadcast, gossip, async_sdbp, sdbp_bandwidth");
  run->add_option("--seed", seeds, "Seeds (repeatable)");
  run->add_option("--gamma", gamma);
  run->add_option("--epsilon", epsilon);
  run->add_option("--delta", delta);
  run->add_option("--noise-mode", noise_mode, "none, uniform_bounded, worst_case_sign");
  run->add_option("--budget", budget, "Round budget");
  run->add_option("--delay", delay, "Async delay bound D");
  run->add_option("--schedule", schedule, "adversarial_max, uniform_random, per_edge_fixed");
  run->add_option("--bandwidth", bandwidth, "Bits per edge per round");
  run->add_option("--value-width", width);
  run->add_option("--states-per-machine", spm);
  run->add_option("--workers", workers);
  run->add_option("-o,--output", output, "Output directory");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Graph and bound report for a dataset");
  std::string mdp_path, partition_path, topo_text;
  double a_eps = 0.01, a_gamma = 0.95;
  std::uint64_t a_delay = 1, a_seed = 0;
  bool a_json = false;
  analyze->add_option("--mdp", mdp_path, "MDP JSON file");
  analyze->add_option("--partition", partition_path, "Partition file");
  analyze->add_option("--topology", topo_text, "Generate kind:M instead of reading files");
  analyze->add_option("--seed", a_seed);
  analyze->add_option("--gamma", a_gamma, "Discount for generated instances");
  analyze->add_option("--epsilon", a_eps);
  analyze->add_option("--delay", a_delay);
  analyze->add_flag("--json", a_json);

  // verify
  auto* verify = app.add_subcommand("verify", "Run a verifier suite");
  std::string suite = "all";
  verify->add_option("suite", suite, "locality, bits, async, gossip_recursion, all");

  // gen
  auto* gen = app.add_subcommand("gen", "Emit instance files");
  std::string g_topo, g_family, g_out = ".", g_bits;
  std::uint64_t g_seed = 0;
  double g_gamma = 0.95;
  std::size_t g_spm = 4, g_len = 3, g_width = 2, g_branch = 2;
  gen->add_option("--topology", g_topo, "kind:M random instance");
  gen->add_option("--family", g_family, "thm1, thm2 or fed_tree");
  gen->add_option("--length", g_len, "Chain length L / tree depth");
  gen->add_option("--width", g_width, "Chains m");
  gen->add_option("--branching", g_branch);
  gen->add_option("--bits", g_bits, "b as a 0/1 string (default all ones)");
  gen->add_option("--seed", g_seed);
  gen->add_option("--gamma", g_gamma);
  gen->add_option("--states-per-machine", g_spm);
  gen->add_option("-o,--output", g_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
      if (!topologies.empty()) {
        cfg.topologies.clear();
        for (const auto& t : topologies) cfg.topologies.push_back(parse_topology(t));
      }
      if (!algorithms.empty()) {
        cfg.algorithms.clear();
        for (const auto& a : algorithms) cfg.algorithms.push_back(algorithm_from_string(a));
      }
      if (!seeds.empty()) cfg.seeds = seeds;
      if (gamma) cfg.gamma = *gamma;
      cfg.mdp.gamma = cfg.gamma;
      if (epsilon) cfg.epsilon = *epsilon;
      if (delta) cfg.delta = *delta;
      if (noise_mode) cfg.noise_mode = noise_mode_from_string(*noise_mode);
      if (budget) cfg.round_budget = *budget;
      if (delay) cfg.delay = *delay;
      if (schedule) cfg.schedule = delay_mode_from_string(*schedule);
      if (bandwidth) cfg.bandwidth_bits = *bandwidth;
      if (width) cfg.value_width = *width;
      if (spm) cfg.mdp.states_per_machine = *spm;
      if (workers) cfg.workers = *workers;
      if (output) cfg.output_dir = *output;
      const auto summary = cmd_run(cfg);
      std::cout << summary.markdown;
      std::cout << fmt::format("wrote {}\n", cfg.output_dir);
      return 0;
    }
    if (*analyze) {
      AnalyzeReport r;
      if (!topo_text.empty()) {
        TopologySpec spec = parse_topology(topo_text);
        spec.seed = a_seed;
        RandomMdpParams params;
        params.gamma = a_gamma;
        const auto inst = gen_topology_mdp(spec, params, a_seed);
        r = cmd_analyze(inst.mdp, inst.data, a_eps, a_delay);
      } else {
        if (mdp_path.empty() || partition_path.empty()) {
          std::cerr << "analyze needs --mdp and --partition, or --topology\n";
          return 2;
        }
        r = cmd_analyze_files(mdp_path, partition_path, a_eps, a_delay);
      }
      std::cout << (a_json ? r.to_json() : r.to_text());
      return 0;
    }
    if (*verify) {
      const auto summary = cmd_verify(verify_suite_from_string(suite));
      std::cout << summary.to_text();
      return summary.all_pass() ? 0 : 1;
    }
    if (*gen) {
      namespace fs = std::filesystem;
      fs::create_directories(g_out);
      if (!g_topo.empty()) {
        TopologySpec spec = parse_topology(g_topo);
        spec.seed = g_seed;
        RandomMdpParams params;
        params.gamma = g_gamma;
        params.states_per_machine = g_spm;
        const auto inst = gen_topology_mdp(spec, params, g_seed);
        write_file(fs::path(g_out) / "mdp.json", mdp_to_json(inst.mdp));
        save_partition(inst.data, (fs::path(g_out) / "partition.txt").string());
        std::cout << fmt::format("wrote {} states on {} machines to {}\n", inst.mdp.n_states(),
                                 inst.data.n_machines(), g_out);
        return 0;
      }
      if (!g_family.empty()) {
        std::vector<bool> bits = g_bits.empty() ? std::vector<bool>(g_width, true) : parse_bits(g_bits);
        HardInstance h;
        if (g_family == "thm1") {
          h = gen_thm1_pair(g_len, g_gamma);
        } else if (g_family == "thm2") {
          h = gen_thm2_family(g_len, bits.size(), g_gamma, bits);
        } else if (g_family == "fed_tree") {
          h = gen_fed_tree(g_len, g_branch, bits.size(), g_gamma, bits);
        } else {
          std::cerr << fmt::format("unknown family '{}'\n", g_family);
          return 2;
        }
        for (std::size_t i = 0; i < h.members.size(); ++i) {
          const auto name = h.members.size() == 1 ? std::string("mdp.json") : fmt::format("mdp_{}.json", i);
          write_file(fs::path(g_out) / name, mdp_to_json(h.members[i]));
        }
        save_partition(h.dataset(0), (fs::path(g_out) / "partition.txt").string());
        std::cout << fmt::format("wrote {} member(s) on {} machines to {}\n", h.members.size(), h.n_machines,
                                 g_out);
        return 0;
      }
      std::cerr << "gen needs --topology or --family\n";
      return 2;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

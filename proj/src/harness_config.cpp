#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "detail/mix.hpp"
#include "dpsim/harness.hpp"

namespace dpsim {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::sdbp: return "sdbp";
    case Algorithm::broadcast: return "broadcast";
    case Algorithm::gossip: return "gossip";
    case Algorithm::async_sdbp: return "async_sdbp";
    case Algorithm::sdbp_bandwidth: return "sdbp_bandwidth";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& s) {
  for (auto a : {Algorithm::sdbp, Algorithm::broadcast, Algorithm::gossip, Algorithm::async_sdbp,
                 Algorithm::sdbp_bandwidth}) {
    if (to_string(a) == s) return a;
  }
  throw ContractViolation(fmt::format("unknown algorithm '{}'", s));
}

void ExperimentConfig::validate() const {
  if (topologies.empty()) throw ContractViolation("config lists no topologies");
  if (algorithms.empty()) throw ContractViolation("config lists no algorithms");
  if (seeds.empty()) throw ContractViolation("config lists no seeds");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ContractViolation("gamma must lie in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ContractViolation("epsilon must lie in (0, 1/2)");
  DeltaNoise{delta, 0, noise_mode}.validate();
  for (const auto& t : topologies) t.validate();
  DelaySchedule(schedule, delay);
  if (value_width == 0) throw ContractViolation("value_width must be positive");
  if (bandwidth_bits && *bandwidth_bits < value_width) {
    throw ContractViolation("bandwidth_bits must hold at least one value");
  }
  if (workers == 0) throw ContractViolation("workers must be at least 1");
}

namespace {

std::string where(const std::string& source, const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.is_null()) return source;
  return fmt::format("{}:{}:{}", source, mark.line + 1, mark.column + 1);
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& source) {
  if (!map.IsMap()) throw ParseError(where(source, map), "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ParseError(where(source, kv.first), fmt::format("unknown key '{}'", key));
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key, const std::string& source) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError(where(source, node), fmt::format("bad value for '{}'", key));
  }
}

template <typename T>
void read(const YAML::Node& map, const char* key, T& out, const std::string& source) {
  if (const auto node = map[key]) out = scalar<T>(node, key, source);
}

template <typename F>
auto wrap(const YAML::Node& node, const std::string& source, F&& f) {
  try {
    return f();
  } catch (const ContractViolation& e) {
    throw ParseError(where(source, node), e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(fmt::format("{}:{}:{}", source, e.mark.line + 1, e.mark.column + 1), e.msg);
  }
  check_keys(root,
             {"name", "output_dir", "topologies", "algorithms", "gamma", "epsilon", "noise", "mdp",
              "seeds", "round_budget", "async", "bandwidth_bits", "value_width", "workers"},
             source);
  ExperimentConfig c;
  read(root, "name", c.name, source);
  read(root, "output_dir", c.output_dir, source);
  read(root, "gamma", c.gamma, source);
  read(root, "epsilon", c.epsilon, source);
  read(root, "round_budget", c.round_budget, source);
  read(root, "value_width", c.value_width, source);
  read(root, "workers", c.workers, source);
  if (const auto b = root["bandwidth_bits"]; b && !b.IsNull()) {
    c.bandwidth_bits = scalar<std::uint64_t>(b, "bandwidth_bits", source);
  }
  if (const auto topos = root["topologies"]) {
    if (!topos.IsSequence()) throw ParseError(where(source, topos), "topologies must be a list");
    for (const auto& t : topos) {
      check_keys(t, {"kind", "machines", "degree", "depth", "branching"}, source);
      TopologySpec spec;
      if (!t["kind"]) throw ParseError(where(source, t), "topology needs a kind");
      spec.kind = wrap(t["kind"], source,
                       [&] { return topology_from_string(scalar<std::string>(t["kind"], "kind", source)); });
      read(t, "machines", spec.machines, source);
      read(t, "degree", spec.expander_degree, source);
      read(t, "depth", spec.tree_depth, source);
      read(t, "branching", spec.branching, source);
      c.topologies.push_back(spec);
    }
  }
  if (const auto algs = root["algorithms"]) {
    if (!algs.IsSequence()) throw ParseError(where(source, algs), "algorithms must be a list");
    for (const auto& a : algs) {
      c.algorithms.push_back(
          wrap(a, source, [&] { return algorithm_from_string(scalar<std::string>(a, "algorithms", source)); }));
    }
  }
  if (const auto seeds = root["seeds"]) {
    if (!seeds.IsSequence()) throw ParseError(where(source, seeds), "seeds must be a list");
    c.seeds.clear();
    for (const auto& s : seeds) c.seeds.push_back(scalar<std::uint64_t>(s, "seeds", source));
  }
  if (const auto noise = root["noise"]) {
    check_keys(noise, {"delta", "mode"}, source);
    read(noise, "delta", c.delta, source);
    if (const auto m = noise["mode"]) {
      c.noise_mode =
          wrap(m, source, [&] { return noise_mode_from_string(scalar<std::string>(m, "mode", source)); });
    }
  }
  if (const auto mdp = root["mdp"]) {
    check_keys(mdp, {"states_per_machine", "actions", "internal_successors", "cross_per_edge"}, source);
    read(mdp, "states_per_machine", c.mdp.states_per_machine, source);
    read(mdp, "actions", c.mdp.actions, source);
    read(mdp, "internal_successors", c.mdp.internal_successors, source);
    read(mdp, "cross_per_edge", c.mdp.cross_per_edge, source);
  }
  if (const auto async = root["async"]) {
    check_keys(async, {"delay", "schedule"}, source);
    read(async, "delay", c.delay, source);
    if (const auto s = async["schedule"]) {
      c.schedule =
          wrap(s, source, [&] { return delay_mode_from_string(scalar<std::string>(s, "schedule", source)); });
    }
  }
  c.mdp.gamma = c.gamma;
  wrap(root, source, [&] { c.validate(); });
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string config_to_yaml(const ExperimentConfig& c) {
  std::string out;
  out += fmt::format("name: {}\n", c.name);
  out += fmt::format("output_dir: {}\n", c.output_dir);
  out += "topologies:\n";
  for (const auto& t : c.topologies) {
    out += fmt::format("  - kind: {}\n", to_string(t.kind));
    if (t.kind == TopologyKind::tree) {
      out += fmt::format("    depth: {}\n    branching: {}\n", t.tree_depth, t.branching);
    } else {
      out += fmt::format("    machines: {}\n", t.machines);
    }
    if (t.kind == TopologyKind::expander) out += fmt::format("    degree: {}\n", t.expander_degree);
  }
  out += "algorithms: [";
  for (std::size_t i = 0; i < c.algorithms.size(); ++i) {
    out += (i ? ", " : "") + to_string(c.algorithms[i]);
  }
  out += "]\n";
  out += fmt::format("gamma: {}\nepsilon: {}\n", c.gamma, c.epsilon);
  out += fmt::format("noise:\n  delta: {}\n  mode: {}\n", c.delta, to_string(c.noise_mode));
  out += fmt::format("mdp:\n  states_per_machine: {}\n  actions: {}\n  internal_successors: {}\n  cross_per_edge: {}\n",
                     c.mdp.states_per_machine, c.mdp.actions, c.mdp.internal_successors, c.mdp.cross_per_edge);
  out += "seeds: [";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) out += fmt::format("{}{}", i ? ", " : "", c.seeds[i]);
  out += "]\n";
  out += fmt::format("round_budget: {}\n", c.round_budget);
  out += fmt::format("async:\n  delay: {}\n  schedule: {}\n", c.delay, to_string(c.schedule));
  if (c.bandwidth_bits) out += fmt::format("bandwidth_bits: {}\n", *c.bandwidth_bits);
  out += fmt::format("value_width: {}\nworkers: {}\n", c.value_width, c.workers);
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = config_to_yaml(config);
  std::uint64_t h = detail::mix64(text.size());
  for (unsigned char ch : text) h = detail::mix64(h ^ ch);
  return fmt::format("{:016x}", h);
}

}  // namespace dpsim

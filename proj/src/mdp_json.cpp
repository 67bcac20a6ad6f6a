#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dpsim/error.hpp"
#include "dpsim/mdp.hpp"

namespace dpsim {

using nlohmann::json;

std::string mdp_to_json(const Mdp& mdp) {
  json transitions = json::array();
  json rewards = json::array();
  for (StateId s = 0; s < mdp.n_states(); ++s) {
    for (ActionId a = 0; a < mdp.n_actions(); ++a) {
      for (const Successor& succ : mdp.successors(s, a)) {
        transitions.push_back(json::array({s, a, succ.next, succ.prob}));
      }
      rewards.push_back(json::array({s, a, mdp.reward(s, a)}));
    }
  }
  json doc;
  doc["n_states"] = mdp.n_states();
  doc["n_actions"] = mdp.n_actions();
  doc["gamma"] = mdp.gamma();
  doc["transitions"] = std::move(transitions);
  doc["rewards"] = std::move(rewards);
  return doc.dump() + "\n";
}

namespace {

template <typename T>
T field(const json& doc, const char* key, const std::string& source) {
  if (!doc.contains(key)) throw ParseError(source, fmt::format("missing field '{}'", key));
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: field '{}'", source, key), e.what());
  }
}

}  // namespace

Mdp mdp_from_json(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: byte {}", source, e.byte), e.what());
  }
  const auto n_states = field<std::size_t>(doc, "n_states", source);
  const auto n_actions = field<std::size_t>(doc, "n_actions", source);
  const auto gamma = field<double>(doc, "gamma", source);
  const auto transitions = field<json>(doc, "transitions", source);
  const auto reward_rows = field<json>(doc, "rewards", source);

  std::vector<Mdp::Entry> entries;
  entries.reserve(transitions.size());
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const json& t = transitions[i];
    if (!t.is_array() || t.size() != 4) {
      throw ParseError(fmt::format("{}: transitions[{}]", source, i), "expected [s, a, s', p]");
    }
    try {
      entries.push_back({t[0].get<StateId>(), t[1].get<ActionId>(), t[2].get<StateId>(),
                         t[3].get<double>()});
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("{}: transitions[{}]", source, i), e.what());
    }
  }
  std::vector<double> rewards(n_states * n_actions, 0.0);
  for (std::size_t i = 0; i < reward_rows.size(); ++i) {
    const json& r = reward_rows[i];
    if (!r.is_array() || r.size() != 3) {
      throw ParseError(fmt::format("{}: rewards[{}]", source, i), "expected [s, a, r]");
    }
    try {
      const auto s = r[0].get<std::size_t>();
      const auto a = r[1].get<std::size_t>();
      if (s >= n_states || a >= n_actions) {
        throw ParseError(fmt::format("{}: rewards[{}]", source, i), "state or action out of range");
      }
      rewards[s * n_actions + a] = r[2].get<double>();
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("{}: rewards[{}]", source, i), e.what());
    }
  }
  try {
    return Mdp::from_entries(n_states, n_actions, gamma, entries, rewards);
  } catch (const ContractViolation& e) {
    throw ParseError(source, e.what());
  }
}

void save_mdp(const Mdp& mdp, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << mdp_to_json(mdp);
}

Mdp load_mdp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return mdp_from_json(buf.str(), path);
}

}  // namespace dpsim

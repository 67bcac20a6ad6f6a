#include <algorithm>
#include <cmath>
#include <bit>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "dpsim/depgraph.hpp"

namespace dpsim {

namespace {

std::string describe_components(const std::vector<std::vector<MachineId>>& comps) {
  std::string s;
  for (const auto& c : comps) s += fmt::format("{{{}}}", fmt::join(c, ","));
  return s;
}

}  // namespace

DisconnectedGraph::DisconnectedGraph(std::vector<std::vector<MachineId>> components)
    : ContractViolation("support graph is disconnected: components " +
                        describe_components(components)),
      components_(std::move(components)) {}

MixingMatrix::MixingMatrix(Eigen::MatrixXd w) : w_(std::move(w)) {
  const auto m = w_.rows();
  if (m == 0 || w_.cols() != m) throw ContractViolation("MixingMatrix: must be square and nonempty");
  for (Eigen::Index i = 0; i < m; ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (w_(i, j) < 0.0) throw ContractViolation("MixingMatrix: negative entry");
      if (std::abs(w_(i, j) - w_(j, i)) > 1e-15) throw ContractViolation("MixingMatrix: not symmetric");
      row_sum += w_(i, j);
    }
    if (std::abs(row_sum - 1.0) > 1e-12) {
      throw ContractViolation(fmt::format("MixingMatrix: row {} sums to {:.17g}", i, row_sum));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w_, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  eigenvalues_.assign(ev.data(), ev.data() + ev.size());
  std::sort(eigenvalues_.begin(), eigenvalues_.end(), std::greater<>());
  gap_ = eigenvalues_.size() > 1 ? 1.0 - std::abs(eigenvalues_[1]) : 1.0;
  rows_.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (w_(i, j) != 0.0) rows_[i].push_back({static_cast<MachineId>(j), w_(i, j)});
    }
  }
}

MixingMatrix MixingMatrix::complete(std::size_t m) {
  return MixingMatrix(Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(m),
                                                static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m)));
}

MixingMatrix mh_matrix(const DepGraph& g, Laziness) {
  if (!g.connected()) throw DisconnectedGraph(g.components());
  const auto m = static_cast<Eigen::Index>(g.n_machines());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
  for (MachineId i = 0; i < g.n_machines(); ++i) {
    for (MachineId j : g.neighbors(i)) {
      w(i, j) = 1.0 / (2.0 * static_cast<double>(std::max(g.degree(i), g.degree(j))));
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != i) off += w(i, j);
    }
    w(i, i) = 1.0 - off;
  }
  return MixingMatrix(std::move(w));
}

double spectral_gap(const MixingMatrix& w) { return w.gap(); }

namespace {

struct WeightedEdge {
  MachineId a;
  MachineId b;
  double w;
};

// ratio(cut, |S|, vol S) for the two conventions.
struct CutProblem {
  std::size_t m = 0;
  std::vector<WeightedEdge> edges;  // each undirected pair once
  std::vector<double> vol;          // per-vertex volume for graph mode
  double total_vol = 0.0;
  bool by_volume = true;

  double ratio(double cut, double vol_s, std::size_t size_s) const {
    if (by_volume) {
      const double denom = std::min(vol_s, total_vol - vol_s);
      return denom > 0.0 ? cut / denom : std::numeric_limits<double>::infinity();
    }
    const double denom =
        static_cast<double>(std::min(size_s, m - size_s)) / static_cast<double>(m);
    return cut / denom;
  }
};

CutResult exhaustive_cut(const CutProblem& p) {
  CutResult best{std::numeric_limits<double>::infinity(), true, {}};
  const std::size_t m = p.m;
  // S and its complement give the same ratio: fix vertex m-1 outside S.
  const std::uint32_t limit = 1U << (m - 1);
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    double cut = 0.0;
    for (const auto& e : p.edges) {
      if (((mask >> e.a) & 1U) != ((mask >> e.b) & 1U)) cut += e.w;
    }
    double vol_s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if ((mask >> i) & 1U) vol_s += p.vol[i];
    }
    const double r = p.ratio(cut, vol_s, static_cast<std::size_t>(std::popcount(mask)));
    if (r < best.value) {
      best.value = r;
      best_mask = mask;
    }
  }
  best.side.assign(m, false);
  for (std::size_t i = 0; i < m; ++i) best.side[i] = (best_mask >> i) & 1U;
  return best;
}

CutResult sweep_cut(const CutProblem& p, const Eigen::VectorXd& embedding) {
  const std::size_t m = p.m;
  std::vector<MachineId> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](MachineId a, MachineId b) { return embedding(a) < embedding(b); });
  std::vector<std::vector<std::pair<MachineId, double>>> adj(m);
  for (const auto& e : p.edges) {
    adj[e.a].push_back({e.b, e.w});
    adj[e.b].push_back({e.a, e.w});
  }
  std::vector<bool> in_s(m, false);
  double cut = 0.0, vol_s = 0.0;
  CutResult best{std::numeric_limits<double>::infinity(), false, {}};
  std::size_t best_k = 0;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const MachineId v = order[k];
    for (auto [u, w] : adj[v]) cut += in_s[u] ? -w : w;
    in_s[v] = true;
    vol_s += p.vol[v];
    const double r = p.ratio(cut, vol_s, k + 1);
    if (r < best.value) {
      best.value = r;
      best_k = k;
    }
  }
  best.side.assign(m, false);
  for (std::size_t k = 0; k <= best_k; ++k) best.side[order[k]] = true;
  return best;
}

CutProblem graph_problem(const DepGraph& g) {
  CutProblem p;
  p.m = g.n_machines();
  p.by_volume = true;
  p.vol.resize(p.m);
  for (MachineId i = 0; i < p.m; ++i) {
    p.vol[i] = static_cast<double>(g.degree(i));
    for (MachineId j : g.neighbors(i)) {
      if (i < j) p.edges.push_back({i, j, 1.0});
    }
  }
  p.total_vol = std::accumulate(p.vol.begin(), p.vol.end(), 0.0);
  return p;
}

CutProblem mixing_problem(const MixingMatrix& w) {
  CutProblem p;
  p.m = w.size();
  p.by_volume = false;
  p.vol.assign(p.m, 1.0);
  p.total_vol = static_cast<double>(p.m);
  for (MachineId i = 0; i < p.m; ++i) {
    for (const auto& entry : w.row(i)) {
      if (i < entry.col) p.edges.push_back({i, entry.col, entry.weight});
    }
  }
  return p;
}

Eigen::MatrixXd normalized_laplacian(const DepGraph& g) {
  const auto m = static_cast<Eigen::Index>(g.n_machines());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(m, m);
  for (MachineId i = 0; i < g.n_machines(); ++i) {
    for (MachineId j : g.neighbors(i)) {
      lap(i, j) = -1.0 / std::sqrt(static_cast<double>(g.degree(i) * g.degree(j)));
    }
  }
  return lap;
}

CutResult trivial_cut(std::size_t m) {
  return CutResult{0.0, true, std::vector<bool>(m, false)};
}

}  // namespace

double normalized_laplacian_gap(const DepGraph& g) {
  if (g.n_machines() < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(normalized_laplacian(g),
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(1);
}

CutResult conductance_sweep(const DepGraph& g, ConductanceMode mode) {
  if (!g.connected()) throw DisconnectedGraph(g.components());
  if (g.n_machines() < 2) return trivial_cut(g.n_machines());
  if (mode == ConductanceMode::mixing_weight) return conductance_sweep(mh_matrix(g));
  const CutProblem p = graph_problem(g);
  if (p.m <= kExhaustiveCutLimit) return exhaustive_cut(p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(normalized_laplacian(g));
  Eigen::VectorXd fiedler = solver.eigenvectors().col(1);
  for (MachineId i = 0; i < p.m; ++i) fiedler(i) /= std::sqrt(p.vol[i]);
  return sweep_cut(p, fiedler);
}

CutResult conductance_sweep(const MixingMatrix& w) {
  if (w.size() < 2) return trivial_cut(w.size());
  const CutProblem p = mixing_problem(w);
  if (p.m <= kExhaustiveCutLimit) return exhaustive_cut(p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w.matrix());
  // Ascending order: the second-largest eigenvalue sits at index m - 2.
  return sweep_cut(p, solver.eigenvectors().col(static_cast<Eigen::Index>(p.m) - 2));
}

CheegerReport cheeger_report(const DepGraph& g, const MixingMatrix& w) {
  CheegerReport r;
  const auto graph_cut = conductance_sweep(g, ConductanceMode::graph_volume);
  const auto w_cut = conductance_sweep(w);
  r.phi_graph = graph_cut.value;
  r.phi_mixing = w_cut.value;
  r.phi_w = w_cut.value / static_cast<double>(w.size());
  r.laplacian_gap = normalized_laplacian_gap(g);
  r.gap_w = w.gap();
  r.exhaustive = graph_cut.exhaustive && w_cut.exhaustive;
  constexpr double slack = 1e-12;
  auto sandwich = [](double phi, double gap) {
    return phi * phi / 2.0 <= gap + slack && gap <= 2.0 * phi + slack;
  };
  r.laplacian_sandwich = sandwich(r.phi_graph, r.laplacian_gap);
  r.mh_sandwich = sandwich(r.phi_w, r.gap_w);
  r.graph_vs_mh_sandwich = sandwich(r.phi_graph, r.gap_w);
  if (!r.graph_vs_mh_sandwich) {
    r.note = fmt::format(
        "graph conductance {:.4f} and MH gossip gap {:.5f} violate phi^2/2 <= gap <= 2 phi: the "
        "Cheeger inequality holds for the normalized Laplacian (gap {:.5f}), not for the lazy MH "
        "matrix on an irregular graph, so gossip can converge slowly despite large conductance",
        r.phi_graph, r.gap_w, r.laplacian_gap);
  }
  return r;
}

std::string graph_report_json(const DepGraph& g, const MixingMatrix& w) {
  nlohmann::json doc;
  doc["M"] = g.n_machines();
  doc["diameter"] = g.diameter();
  doc["gap"] = w.gap();
  doc["phi_graph"] = conductance_sweep(g, ConductanceMode::graph_volume).value;
  doc["phi_mixing"] = conductance_sweep(w).value;
  doc["eigenvalues"] = w.eigenvalues();
  return doc.dump(2) + "\n";
}

}  // namespace dpsim

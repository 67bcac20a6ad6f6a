#pragma once

// Independent reference implementations used as test oracles. They share
// no code with the library beyond the Mdp accessors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dpsim/mdp.hpp"

namespace oracle {

// Dense P[s][a][s'] with R[s][a].
struct Dense {
  std::size_t n, na;
  double gamma;
  std::vector<double> p, r;
  double& P(std::size_t s, std::size_t a, std::size_t t) { return p[(s * na + a) * n + t]; }
};

inline Dense densify(const dpsim::Mdp& m) {
  Dense d{m.n_states(), m.n_actions(), m.gamma(), {}, {}};
  d.p.assign(d.n * d.na * d.n, 0.0);
  d.r.assign(d.n * d.na, 0.0);
  for (std::size_t s = 0; s < d.n; ++s) {
    for (std::size_t a = 0; a < d.na; ++a) {
      for (auto e : m.successors(s, a)) d.P(s, a, e.next) += e.prob;
      d.r[s * d.na + a] = m.reward(s, a);
    }
  }
  return d;
}

inline std::vector<double> bellman(Dense& d, const std::vector<double>& v) {
  std::vector<double> out(d.n, -std::numeric_limits<double>::infinity());
  for (std::size_t s = 0; s < d.n; ++s) {
    for (std::size_t a = 0; a < d.na; ++a) {
      double q = d.r[s * d.na + a];
      for (std::size_t t = 0; t < d.n; ++t) q += d.gamma * d.P(s, a, t) * v[t];
      out[s] = std::max(out[s], q);
    }
  }
  return out;
}

inline std::vector<double> truncated(Dense& d, std::size_t horizon) {
  std::vector<double> v(d.n, 0.0);
  for (std::size_t i = 0; i < horizon; ++i) v = bellman(d, v);
  return v;
}

inline std::vector<double> vstar(Dense& d) {
  std::vector<double> v(d.n, 0.0);
  for (int i = 0; i < 100000; ++i) {
    auto next = bellman(d, v);
    double step = 0.0;
    for (std::size_t s = 0; s < d.n; ++s) step = std::max(step, std::abs(next[s] - v[s]));
    v = next;
    if (step < 1e-14) break;
  }
  return v;
}

inline double sup(const std::vector<double>& a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Largest L with gamma^L > 2 eps, by repeated multiplication.
inline std::size_t radius(double gamma, double eps) {
  std::size_t l = 0;
  double p = gamma;
  while (p > 2.0 * eps) {
    ++l;
    p *= gamma;
  }
  return l;
}

// All-pairs distances by Floyd-Warshall.
inline std::vector<std::vector<std::size_t>> floyd(std::size_t m,
                                                    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  const std::size_t inf = std::numeric_limits<std::size_t>::max() / 4;
  std::vector<std::vector<std::size_t>> d(m, std::vector<std::size_t>(m, inf));
  for (std::size_t i = 0; i < m; ++i) d[i][i] = 0;
  for (auto [a, b] : edges) d[a][b] = d[b][a] = 1;
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

// Exhaustive graph-volume conductance over all nonempty proper subsets.
inline double conductance(std::size_t m, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  std::vector<double> deg(m, 0.0);
  for (auto [a, b] : edges) deg[a] += 1, deg[b] += 1;
  double total = 0.0;
  for (double x : deg) total += x;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << m); ++mask) {
    double vol = 0.0, cut = 0.0;
    for (std::size_t i = 0; i < m; ++i) if (mask >> i & 1) vol += deg[i];
    for (auto [a, b] : edges) if ((mask >> a & 1) != (mask >> b & 1)) cut += 1;
    best = std::min(best, cut / std::min(vol, total - vol));
  }
  return best;
}

}  // namespace oracle

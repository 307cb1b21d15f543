#pragma once

// Dinic max-flow, generic over the capacity type so rational inputs can run
// on exact integers after scaling to a common denominator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <type_traits>
#include <utility>
#include <vector>

#include "qstrassen/errors.hpp"

namespace qstrassen {

template <class Cap>
class Dinic {
 public:
  explicit Dinic(int nodes, Cap eps = Cap{}) : adj_(static_cast<std::size_t>(nodes)), eps_(eps) {}

  /// Returns the edge id, usable with flow_on().
  int add_edge(int from, int to, Cap cap) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({to, cap, Cap{}});
    adj_[static_cast<std::size_t>(from)].push_back(id);
    edges_.push_back({from, Cap{}, Cap{}});
    adj_[static_cast<std::size_t>(to)].push_back(id + 1);
    return id;
  }

  Cap max_flow(int s, int t) {
    Cap total{};
    while (bfs(s, t)) {
      it_.assign(adj_.size(), 0);
      while (true) {
        const Cap pushed = dfs(s, t, std::numeric_limits<Cap>::max());
        if (!(pushed > eps_)) break;
        total += pushed;
      }
    }
    return total;
  }

  Cap flow_on(int edge_id) const { return edges_[static_cast<std::size_t>(edge_id)].flow; }

 private:
  struct Edge {
    int to;
    Cap cap;
    Cap flow;
  };

  Cap residual(const Edge& e) const { return e.cap - e.flow; }

  bool bfs(int s, int t) {
    level_.assign(adj_.size(), -1);
    std::queue<int> q;
    level_[static_cast<std::size_t>(s)] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int id : adj_[static_cast<std::size_t>(u)]) {
        const Edge& e = edges_[static_cast<std::size_t>(id)];
        if (level_[static_cast<std::size_t>(e.to)] < 0 && residual(e) > eps_) {
          level_[static_cast<std::size_t>(e.to)] = level_[static_cast<std::size_t>(u)] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[static_cast<std::size_t>(t)] >= 0;
  }

  Cap dfs(int u, int t, Cap limit) {
    if (u == t) return limit;
    auto& i = it_[static_cast<std::size_t>(u)];
    const auto& out = adj_[static_cast<std::size_t>(u)];
    for (; i < out.size(); ++i) {
      const int id = out[i];
      Edge& e = edges_[static_cast<std::size_t>(id)];
      if (level_[static_cast<std::size_t>(e.to)] != level_[static_cast<std::size_t>(u)] + 1 || !(residual(e) > eps_))
        continue;
      const Cap pushed = dfs(e.to, t, std::min(limit, residual(e)));
      if (pushed > eps_) {
        e.flow += pushed;
        edges_[static_cast<std::size_t>(id ^ 1)].flow -= pushed;
        return pushed;
      }
    }
    return Cap{};
  }

  std::vector<std::vector<int>> adj_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
  Cap eps_;
};

/// Probability vectors on [m] and [n] with an allowed support E.
struct ClassicalInstance {
  int m = 0;
  int n = 0;
  std::vector<double> mu1;
  std::vector<double> mu2;
  std::vector<std::pair<int, int>> edges;  ///< 0-based (row, column)

  void validate() const {
    if (m < 1 || n < 1) throw DimensionError("classical instance: m and n must be positive");
    if (static_cast<int>(mu1.size()) != m || static_cast<int>(mu2.size()) != n)
      throw DimensionError("classical instance: marginal length mismatch");
    for (const auto* mu : {&mu1, &mu2}) {
      double s = 0.0;
      for (double v : *mu) {
        if (!(v >= 0.0)) throw InvariantError("nonnegative marginal", -v);
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-12) throw InvariantError("marginal sums to 1", std::abs(s - 1.0));
    }
    for (const auto& [i, j] : edges)
      if (i < 0 || i >= m || j < 0 || j >= n) throw DimensionError("classical instance: edge out of range");
  }
};

struct ClassicalResult {
  bool feasible = false;
  double flow_value = 0.0;
  bool exact = false;  ///< solved on integers after common-denominator scaling
  std::optional<std::vector<std::vector<double>>> coupling;
};

namespace detail {

/// Smallest L <= max_den with every L * v_i within tol of an integer.
inline std::optional<std::int64_t> common_denominator(const std::vector<double>& values, std::int64_t max_den = 1 << 20,
                                                      double tol = 1e-9) {
  for (std::int64_t l = 1; l <= max_den; ++l) {
    bool ok = true;
    for (double v : values) {
      const double s = v * static_cast<double>(l);
      if (std::abs(s - std::round(s)) > tol) {
        ok = false;
        break;
      }
    }
    if (ok) return l;
  }
  return std::nullopt;
}

template <class Cap>
ClassicalResult run_transport_flow(const ClassicalInstance& inst, const std::vector<Cap>& c1, const std::vector<Cap>& c2,
                                   Cap total, Cap inf, Cap eps, double unit) {
  const int src = 0;
  const int sink = inst.m + inst.n + 1;
  Dinic<Cap> g(inst.m + inst.n + 2, eps);
  for (int i = 0; i < inst.m; ++i) g.add_edge(src, 1 + i, c1[static_cast<std::size_t>(i)]);
  for (int j = 0; j < inst.n; ++j) g.add_edge(1 + inst.m + j, sink, c2[static_cast<std::size_t>(j)]);
  std::vector<int> ids;
  for (const auto& [i, j] : inst.edges) ids.push_back(g.add_edge(1 + i, 1 + inst.m + j, inf));
  const Cap flow = g.max_flow(src, sink);

  ClassicalResult r;
  r.flow_value = static_cast<double>(flow) / unit;
  if constexpr (std::is_integral_v<Cap>) {
    r.feasible = flow == total;
  } else {
    r.feasible = static_cast<double>(flow) >= static_cast<double>(total) - 1e-12;
  }
  if (r.feasible) {
    std::vector<std::vector<double>> a(static_cast<std::size_t>(inst.m), std::vector<double>(static_cast<std::size_t>(inst.n), 0.0));
    for (std::size_t e = 0; e < ids.size(); ++e) {
      const auto [i, j] = inst.edges[e];
      a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += static_cast<double>(g.flow_on(ids[e])) / unit;
    }
    r.coupling = std::move(a);
  }
  return r;
}

}  // namespace detail

/// Transportation feasibility by max-flow: a coupling with marginals
/// (mu1, mu2) supported on E exists iff the max flow equals 1.
inline ClassicalResult classical_strassen(const ClassicalInstance& inst) {
  inst.validate();
  std::vector<double> all = inst.mu1;
  all.insert(all.end(), inst.mu2.begin(), inst.mu2.end());
  if (const auto den = detail::common_denominator(all, 4096)) {
    std::vector<std::int64_t> c1, c2;
    for (double v : inst.mu1) c1.push_back(std::llround(v * static_cast<double>(*den)));
    for (double v : inst.mu2) c2.push_back(std::llround(v * static_cast<double>(*den)));
    std::int64_t s1 = 0, s2 = 0;
    for (auto v : c1) s1 += v;
    for (auto v : c2) s2 += v;
    if (s1 == *den && s2 == *den) {
      auto r = detail::run_transport_flow<std::int64_t>(inst, c1, c2, *den, 4 * *den + 4, 0,
                                                        static_cast<double>(*den));
      r.exact = true;
      return r;
    }
  }
  auto r = detail::run_transport_flow<double>(inst, inst.mu1, inst.mu2, 1.0, 4.0, 1e-15, 1.0);
  r.exact = false;
  return r;
}

}  // namespace qstrassen

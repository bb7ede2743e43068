#pragma once

#include <cmath>
#include <vector>

#include "streamcov/network.hpp"

namespace testnet {

// Directed Y: outlet 0, junction 1, leaves 2 and 3, unit lengths.
// Edge 1: 1->0, edge 2: 2->1, edge 3: 3->1.  Omegas additive (2 at the stem).
inline streamcov::Network y_tree() {
  streamcov::Network net;
  net.directed = true;
  net.outlet = 0;
  net.edges = {{1, 1, 0, 1.0, 2.0}, {2, 2, 1, 1.0, 1.0}, {3, 3, 1, 1.0, 1.0}};
  return net;
}

inline streamcov::Network star3() {
  streamcov::Network net;
  net.edges = {{1, 0, 1, 1.0, 1.0}, {2, 0, 2, 1.0, 1.0}, {3, 0, 3, 1.0, 1.0}};
  return net;
}

inline streamcov::Network triangle() {
  streamcov::Network net;
  net.edges = {{1, 0, 1, 1.0, 1.0}, {2, 1, 2, 1.0, 1.0}, {3, 2, 0, 1.0, 1.0}};
  return net;
}

// Directed path 0 <- 1 <- ... <- k with unit edges, outlet 0.
inline streamcov::Network path_tree(int k) {
  streamcov::Network net;
  net.directed = true;
  net.outlet = 0;
  for (int v = 1; v <= k; ++v)
    net.edges.push_back({v, v, v - 1, 1.0, static_cast<double>(k - v + 1)});
  return net;
}

// Unique tree path length between two points, found by DFS over the graph
// subdivided at both points.  Independent of the library's distance code.
inline double tree_path_oracle(const streamcov::Network& net, const streamcov::PointOnNetwork& p,
                               const streamcov::PointOnNetwork& q) {
  struct Arc {
    long long to;
    double len;
  };
  // node ids: vertices as-is; virtual nodes get large ids
  const long long P = 1'000'000'001, Q = 1'000'000'002;
  std::vector<std::pair<long long, Arc>> arcs;
  auto add = [&](long long a, long long b, double len) {
    arcs.push_back({a, {b, len}});
    arcs.push_back({b, {a, len}});
  };
  for (const auto& e : net.edges) {
    const bool has_p = e.id == p.edge && p.offset > 0.0 && p.offset < e.length;
    const bool has_q = e.id == q.edge && q.offset > 0.0 && q.offset < e.length;
    if (has_p && has_q) {
      const double o1 = std::min(p.offset, q.offset), o2 = std::max(p.offset, q.offset);
      const long long m1 = p.offset <= q.offset ? P : Q;
      const long long m2 = p.offset <= q.offset ? Q : P;
      add(e.tail, m1, o1);
      add(m1, m2, o2 - o1);
      add(m2, e.head, e.length - o2);
    } else if (has_p) {
      add(e.tail, P, p.offset);
      add(P, e.head, e.length - p.offset);
    } else if (has_q) {
      add(e.tail, Q, q.offset);
      add(Q, e.head, e.length - q.offset);
    } else {
      add(e.tail, e.head, e.length);
    }
  }
  auto node_of = [&](const streamcov::PointOnNetwork& pt, long long virt) -> long long {
    for (const auto& e : net.edges)
      if (e.id == pt.edge) {
        if (pt.offset == 0.0) return e.tail;
        if (pt.offset == e.length) return e.head;
        return virt;
      }
    return virt;
  };
  const long long src = node_of(p, P), dst = node_of(q, Q);
  if (src == dst) return 0.0;
  // exhaustive DFS over simple paths; a tree has exactly one
  double found = -1.0;
  struct Frame {
    long long node;
    double len;
    long long from;
  };
  std::vector<Frame> todo = {{src, 0.0, -1}};
  while (!todo.empty()) {
    Frame f = todo.back();
    todo.pop_back();
    if (f.node == dst) {
      found = f.len;
      continue;
    }
    for (const auto& [a, arc] : arcs)
      if (a == f.node && arc.to != f.from) todo.push_back({arc.to, f.len + arc.len, f.node});
  }
  return found;
}

}  // namespace testnet

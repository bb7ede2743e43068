#include "streamcov/synth.hpp"

#include <algorithm>
#include <cmath>

namespace streamcov {

Network random_tree(Rng& rng, int n_edges, double len_lo, double len_hi, bool directed) {
  Network net;
  net.directed = directed;
  if (directed) net.outlet = 0;
  // parent[v] for v = 1..n_edges; edge v: v -> parent[v]
  std::vector<int> parent(n_edges + 1, 0);
  for (int v = 1; v <= n_edges; ++v) {
    parent[v] = rng.uniform_int(0, v - 1);
    Edge e;
    e.id = v;
    e.tail = v;
    e.head = parent[v];
    e.length = rng.uniform(len_lo, len_hi);
    e.omega = 1.0;
    net.edges.push_back(e);
  }
  // additive omegas: every vertex contributes a unit of drainage, edge omega
  // carries the subtree total of its tail
  std::vector<double> subtree(n_edges + 1, 1.0);
  for (int v = n_edges; v >= 1; --v) subtree[parent[v]] += subtree[v];
  // edges were appended in tail order, so edge k has tail k+1
  for (auto& e : net.edges) e.omega = subtree[e.tail];
  return net;
}

std::vector<PointOnNetwork> random_points(const Network& net, Rng& rng, int count) {
  double total = 0.0;
  for (const auto& e : net.edges) total += e.length;
  std::vector<PointOnNetwork> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    double pick = rng.uniform() * total;
    const Edge* chosen = &net.edges.back();
    for (const auto& e : net.edges) {
      if (pick < e.length) {
        chosen = &e;
        break;
      }
      pick -= e.length;
    }
    pts.push_back({chosen->id, rng.uniform() * chosen->length});
  }
  return pts;
}

std::vector<double> random_times(Rng& rng, int count, double t_max) {
  std::vector<double> t(count);
  for (auto& x : t) x = rng.uniform(0.0, t_max);
  return t;
}

}  // namespace streamcov

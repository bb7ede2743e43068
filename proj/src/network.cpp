#include "streamcov/network.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

namespace streamcov {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::Disconnected: return "Disconnected";
    case Errc::SelfEdge: return "SelfEdge";
    case Errc::MultiEdge: return "MultiEdge";
    case Errc::NonpositiveLength: return "NonpositiveLength";
    case Errc::NotATree: return "NotATree";
    case Errc::BadOutlet: return "BadOutlet";
    case Errc::InvalidNetwork: return "InvalidNetwork";
    case Errc::InvalidPoint: return "InvalidPoint";
    case Errc::SingularLaplacian: return "SingularLaplacian";
    case Errc::NotDirected: return "NotDirected";
    case Errc::FlowUnconnectedPair: return "FlowUnconnectedPair";
    case Errc::OutOfDomainParam: return "OutOfDomainParam";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::DeltaTooSmallForTree: return "DeltaTooSmallForTree";
    case Errc::HypothesisViolation: return "HypothesisViolation";
    case Errc::QuadratureFailure: return "QuadratureFailure";
    case Errc::Divergent: return "Divergent";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::RankDeficientDesign: return "RankDeficientDesign";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::NonpositiveSd: return "NonpositiveSd";
    case Errc::DuplicateRecord: return "DuplicateRecord";
    case Errc::UnknownVariant: return "UnknownVariant";
    case Errc::UnknownParam: return "UnknownParam";
    case Errc::ConstraintViolation: return "ConstraintViolation";
    case Errc::IoError: return "IoError";
  }
  return "Error";
}

namespace {

std::vector<VertexId> collect_vertices(const Network& net) {
  if (!net.vertices.empty()) return net.vertices;
  std::set<VertexId> vs;
  for (const auto& e : net.edges) {
    vs.insert(e.tail);
    vs.insert(e.head);
  }
  return {vs.begin(), vs.end()};
}

}  // namespace

std::vector<std::string> validate_network(const Network& net) {
  std::vector<std::string> warnings;
  if (net.edges.empty()) fail(Errc::InvalidNetwork, "network has no edges");

  const auto vids = collect_vertices(net);
  std::unordered_map<VertexId, int> vslot;
  for (int i = 0; i < static_cast<int>(vids.size()); ++i) vslot[vids[i]] = i;

  std::set<EdgeId> edge_ids;
  std::set<std::pair<VertexId, VertexId>> pairs;
  for (const auto& e : net.edges) {
    if (!edge_ids.insert(e.id).second)
      fail(Errc::InvalidNetwork, "duplicate edge id " + std::to_string(e.id));
    if (!vslot.count(e.tail) || !vslot.count(e.head))
      fail(Errc::InvalidNetwork, "edge " + std::to_string(e.id) + " references unknown vertex");
    if (e.tail == e.head)
      fail(Errc::SelfEdge, "edge " + std::to_string(e.id) + " joins a vertex to itself");
    auto key = std::minmax(e.tail, e.head);
    if (!pairs.insert({key.first, key.second}).second)
      fail(Errc::MultiEdge, "more than one edge joins vertices " + std::to_string(e.tail) +
                                " and " + std::to_string(e.head));
    if (!(e.length > 0.0))
      fail(Errc::NonpositiveLength, "edge " + std::to_string(e.id) + " has length <= 0");
    if (!(e.omega > 0.0))
      fail(Errc::NonpositiveLength, "edge " + std::to_string(e.id) + " has omega <= 0");
  }

  // connectivity over the underlying undirected graph
  std::vector<std::vector<int>> adj(vids.size());
  for (int k = 0; k < static_cast<int>(net.edges.size()); ++k) {
    const auto& e = net.edges[k];
    adj[vslot[e.tail]].push_back(vslot[e.head]);
    adj[vslot[e.head]].push_back(vslot[e.tail]);
  }
  std::vector<char> seen(vids.size(), 0);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!bfs.empty()) {
    int v = bfs.front();
    bfs.pop();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        bfs.push(w);
      }
  }
  if (reached != static_cast<int>(vids.size()))
    fail(Errc::Disconnected, "graph is not connected");

  if (net.directed) {
    if (!net.outlet || !vslot.count(*net.outlet))
      fail(Errc::BadOutlet, "directed network requires an outlet vertex present in the graph");
    if (net.edges.size() != vids.size() - 1)
      fail(Errc::NotATree, "directed network must be a tree (|E| = |V| - 1)");
    // BFS from the outlet; each edge must have its head on the outlet side
    std::vector<int> parent(vids.size(), -2);
    const int root = vslot[*net.outlet];
    parent[root] = -1;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int w : adj[v])
        if (parent[w] == -2) {
          parent[w] = v;
          q.push(w);
        }
    }
    for (const auto& e : net.edges) {
      const int t = vslot[e.tail], h = vslot[e.head];
      if (parent[t] != h)
        fail(Errc::NotATree,
             "edge " + std::to_string(e.id) + " is not oriented toward the outlet");
    }
    // omega additivity (soft): flow out of a vertex should carry the sum of
    // the flows into it
    std::vector<double> inflow(vids.size(), 0.0);
    std::vector<int> indeg(vids.size(), 0);
    std::vector<const Edge*> outedge(vids.size(), nullptr);
    for (const auto& e : net.edges) {
      inflow[vslot[e.head]] += e.omega;
      indeg[vslot[e.head]] += 1;
      outedge[vslot[e.tail]] = &e;
    }
    for (int v = 0; v < static_cast<int>(vids.size()); ++v) {
      if (indeg[v] == 0 || outedge[v] == nullptr) continue;
      const double out = outedge[v]->omega;
      if (std::abs(out - inflow[v]) > 1e-6 * std::max(1.0, out)) {
        std::ostringstream os;
        os << "omega not additive at vertex " << vids[v] << ": outflow " << out
           << " vs inflow sum " << inflow[v];
        warnings.push_back(os.str());
      }
    }
  }
  return warnings;
}

NetworkIndex::NetworkIndex(const Network& net) : net_(net) {
  vids_ = collect_vertices(net_);
  net_.vertices = vids_;
  for (int i = 0; i < static_cast<int>(vids_.size()); ++i) vslot_[vids_[i]] = i;
  adj_.assign(vids_.size(), {});
  for (int k = 0; k < static_cast<int>(net_.edges.size()); ++k) {
    const auto& e = net_.edges[k];
    if (!eslot_.emplace(e.id, k).second)
      fail(Errc::InvalidNetwork, "duplicate edge id " + std::to_string(e.id));
    if (!vslot_.count(e.tail) || !vslot_.count(e.head))
      fail(Errc::InvalidNetwork, "edge endpoints missing from vertex list");
    adj_[vslot_[e.tail]].push_back({k, vslot_[e.head]});
    adj_[vslot_[e.head]].push_back({k, vslot_[e.tail]});
  }

  for (const auto& nbrs : adj_) leaf_count_ += (nbrs.size() == 1);

  // all-pairs vertex distances: Dijkstra from each vertex (graphs are small)
  const int n = vertex_count();
  vdist_.assign(n, std::vector<double>(n, std::numeric_limits<double>::infinity()));
  using QE = std::pair<double, int>;
  for (int s = 0; s < n; ++s) {
    auto& dist = vdist_[s];
    dist[s] = 0.0;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    pq.push({0.0, s});
    while (!pq.empty()) {
      auto [dv, v] = pq.top();
      pq.pop();
      if (dv > dist[v]) continue;
      for (auto [ek, w] : adj_[v]) {
        const double cand = dv + net_.edges[ek].length;
        if (cand < dist[w]) {
          dist[w] = cand;
          pq.push({cand, w});
        }
      }
    }
  }

  if (net_.directed) {
    if (!net_.outlet || !vslot_.count(*net_.outlet))
      fail(Errc::BadOutlet, "directed network requires an outlet vertex present in the graph");
    outlet_slot_ = vslot_[*net_.outlet];
    parent_.assign(n, -1);
    parent_edge_.assign(n, -1);
    down_dist_.assign(n, 0.0);
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(outlet_slot_);
    seen[outlet_slot_] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (auto [ek, w] : adj_[v])
        if (!seen[w]) {
          seen[w] = 1;
          parent_[w] = v;
          parent_edge_[w] = ek;
          down_dist_[w] = down_dist_[v] + net_.edges[ek].length;
          q.push(w);
        }
    }
  }
}

const Edge& NetworkIndex::edge_by_id(EdgeId e) const {
  auto it = eslot_.find(e);
  if (it == eslot_.end()) fail(Errc::InvalidPoint, "unknown edge id " + std::to_string(e));
  return net_.edges[it->second];
}

int NetworkIndex::vslot(VertexId v) const { return vslot_.at(v); }

int NetworkIndex::eslot(EdgeId e) const {
  auto it = eslot_.find(e);
  if (it == eslot_.end()) fail(Errc::InvalidPoint, "unknown edge id " + std::to_string(e));
  return it->second;
}

void NetworkIndex::check_point(const PointOnNetwork& p) const {
  const Edge& e = edge_by_id(p.edge);
  if (!(p.offset >= 0.0) || !(p.offset <= e.length))
    fail(Errc::InvalidPoint, "offset " + std::to_string(p.offset) + " outside [0, " +
                                 std::to_string(e.length) + "] on edge " + std::to_string(p.edge));
}

NetworkIndex::Canon NetworkIndex::canon(const PointOnNetwork& p) const {
  check_point(p);
  const int ek = eslot(p.edge);
  const Edge& e = net_.edges[ek];
  Canon c;
  if (p.offset == 0.0) {
    c.at_vertex = true;
    c.v = vslot_.at(e.tail);
  } else if (p.offset == e.length) {
    c.at_vertex = true;
    c.v = vslot_.at(e.head);
  } else {
    c.e = ek;
    c.off = p.offset;
  }
  return c;
}

bool NetworkIndex::same_point(const PointOnNetwork& p, const PointOnNetwork& q) const {
  const Canon cp = canon(p), cq = canon(q);
  if (cp.at_vertex != cq.at_vertex) return false;
  if (cp.at_vertex) return cp.v == cq.v;
  return cp.e == cq.e && cp.off == cq.off;
}

double NetworkIndex::geodesic(const PointOnNetwork& p, const PointOnNetwork& q) const {
  const Canon cp = canon(p), cq = canon(q);
  auto vertex_of = [&](const Canon& c, bool tail_side) {
    const Edge& e = net_.edges[c.e];
    return vslot_.at(tail_side ? e.tail : e.head);
  };
  if (cp.at_vertex && cq.at_vertex) return vdist_[cp.v][cq.v];
  if (cp.at_vertex || cq.at_vertex) {
    const Canon& cv = cp.at_vertex ? cp : cq;
    const Canon& ce = cp.at_vertex ? cq : cp;
    const Edge& e = net_.edges[ce.e];
    const double via_tail = vdist_[cv.v][vertex_of(ce, true)] + ce.off;
    const double via_head = vdist_[cv.v][vertex_of(ce, false)] + (e.length - ce.off);
    return std::min(via_tail, via_head);
  }
  double best = std::numeric_limits<double>::infinity();
  if (cp.e == cq.e) best = std::abs(cp.off - cq.off);
  const Edge& ep = net_.edges[cp.e];
  const Edge& eq = net_.edges[cq.e];
  const double p_end[2] = {cp.off, ep.length - cp.off};
  const double q_end[2] = {cq.off, eq.length - cq.off};
  const int p_v[2] = {vertex_of(cp, true), vertex_of(cp, false)};
  const int q_v[2] = {vertex_of(cq, true), vertex_of(cq, false)};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      best = std::min(best, p_end[i] + vdist_[p_v[i]][q_v[j]] + q_end[j]);
  return best;
}

double NetworkIndex::resistance(const PointOnNetwork& p, const PointOnNetwork& q) const {
  const Canon cp = canon(p), cq = canon(q);
  if (cp.at_vertex && cq.at_vertex && cp.v == cq.v) return 0.0;
  if (!cp.at_vertex && !cq.at_vertex && cp.e == cq.e && cp.off == cq.off) return 0.0;

  // Assemble the Laplacian over the original vertices plus virtual vertices
  // splitting the host edges at interior points.  Conductance = 1 / length.
  int n = vertex_count();
  const int P = cp.at_vertex ? cp.v : n++;
  const int q_slot = cq.at_vertex ? cq.v : n++;

  struct RE {
    int a, b;
    double len;
  };
  std::vector<RE> res_edges;
  res_edges.reserve(net_.edges.size() + 2);

  for (int k = 0; k < static_cast<int>(net_.edges.size()); ++k) {
    const Edge& e = net_.edges[k];
    const int t = vslot_.at(e.tail), h = vslot_.at(e.head);
    const bool has_p = !cp.at_vertex && cp.e == k;
    const bool has_q = !cq.at_vertex && cq.e == k;
    if (has_p && has_q) {
      const double o1 = std::min(cp.off, cq.off), o2 = std::max(cp.off, cq.off);
      const int s1 = (cp.off <= cq.off) ? P : q_slot;
      const int s2 = (cp.off <= cq.off) ? q_slot : P;
      res_edges.push_back({t, s1, o1});
      res_edges.push_back({s1, s2, o2 - o1});
      res_edges.push_back({s2, h, e.length - o2});
    } else if (has_p) {
      res_edges.push_back({t, P, cp.off});
      res_edges.push_back({P, h, e.length - cp.off});
    } else if (has_q) {
      res_edges.push_back({t, q_slot, cq.off});
      res_edges.push_back({q_slot, h, e.length - cq.off});
    } else {
      res_edges.push_back({t, h, e.length});
    }
  }

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (const auto& re : res_edges) {
    const double c = 1.0 / re.len;
    L(re.a, re.a) += c;
    L(re.b, re.b) += c;
    L(re.a, re.b) -= c;
    L(re.b, re.a) -= c;
  }
  // L + (1/n) 11' is nonsingular iff the graph is connected; the rank-one
  // shift is invisible to vectors orthogonal to 1.
  L.array() += 1.0 / n;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(P) += 1.0;
  rhs(q_slot) -= 1.0;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(L);
  if (ldlt.info() != Eigen::Success)
    fail(Errc::SingularLaplacian, "Laplacian factorization failed");
  const Eigen::VectorXd x = ldlt.solve(rhs);
  const double r = x(P) - x(q_slot);
  if (!std::isfinite(r) || r < -1e-9)
    fail(Errc::SingularLaplacian, "effective resistance is not finite (disconnected graph?)");
  return std::max(r, 0.0);
}

bool NetworkIndex::is_down_ancestor(int anc, int v) const {
  while (v != -1) {
    if (v == anc) return true;
    v = parent_[v];
  }
  return false;
}

FlowRelation NetworkIndex::flow_relation(const PointOnNetwork& p, const PointOnNetwork& q) const {
  if (!net_.directed)
    fail(Errc::NotDirected, "flow relations require a directed network with an outlet");
  const Canon cp = canon(p), cq = canon(q);
  if (same_point(p, q)) return {FlowKind::SamePoint, 0.0, 0.0, 0.0};

  // anchor vertex: the first vertex on the point's downstream path
  auto anchor = [&](const Canon& c) { return c.at_vertex ? c.v : vslot_.at(net_.edges[c.e].head); };
  auto drop = [&](const Canon& c) {  // distance from the point to its anchor
    return c.at_vertex ? 0.0 : net_.edges[c.e].length - c.off;
  };

  // same-edge pairs are always flow-connected
  if (!cp.at_vertex && !cq.at_vertex && cp.e == cq.e) {
    return {FlowKind::Connected, std::abs(cp.off - cq.off), 0.0, 0.0};
  }

  // q strictly downstream of p along p's path to the outlet?
  auto downstream_dist = [&](const Canon& up, const Canon& down) -> double {
    const int a_up = anchor(up);
    if (down.at_vertex) {
      if (!is_down_ancestor(down.v, a_up)) return -1.0;
      return drop(up) + (down_dist_[a_up] - down_dist_[down.v]);
    }
    const Edge& e = net_.edges[down.e];
    const int t = vslot_.at(e.tail);
    if (!is_down_ancestor(t, a_up)) return -1.0;
    return drop(up) + (down_dist_[a_up] - down_dist_[t]) + down.off;
  };

  double d = downstream_dist(cp, cq);
  if (d < 0.0) d = downstream_dist(cq, cp);
  if (d >= 0.0) return {FlowKind::Connected, d, 0.0, 0.0};

  // flow-unconnected: merge junction of the two downstream chains
  int ap = anchor(cp), aq = anchor(cq);
  while (ap != aq) {
    if (down_dist_[ap] >= down_dist_[aq])
      ap = parent_[ap];
    else
      aq = parent_[aq];
  }
  const double da = drop(cp) + (down_dist_[anchor(cp)] - down_dist_[ap]);
  const double db = drop(cq) + (down_dist_[anchor(cq)] - down_dist_[ap]);
  FlowRelation rel;
  rel.kind = FlowKind::Unconnected;
  rel.a = std::min(da, db);
  rel.b = std::max(da, db);
  rel.d = rel.a + rel.b;
  return rel;
}

double NetworkIndex::tailup_weight(const PointOnNetwork& p, const PointOnNetwork& q) const {
  const FlowRelation rel = flow_relation(p, q);
  if (rel.kind == FlowKind::Unconnected)
    fail(Errc::FlowUnconnectedPair, "tail-up weights are defined for flow-connected pairs only");
  const double wp = edge_omega(p.edge);
  const double wq = edge_omega(q.edge);
  return std::min(std::sqrt(wp / wq), std::sqrt(wq / wp));
}

double geodesic_distance(const Network& net, const PointOnNetwork& p, const PointOnNetwork& q) {
  return NetworkIndex(net).geodesic(p, q);
}

double resistance_distance(const Network& net, const PointOnNetwork& p, const PointOnNetwork& q) {
  return NetworkIndex(net).resistance(p, q);
}

FlowRelation flow_relation(const Network& net, const PointOnNetwork& p, const PointOnNetwork& q) {
  return NetworkIndex(net).flow_relation(p, q);
}

double tailup_weight(const Network& net, const PointOnNetwork& p, const PointOnNetwork& q) {
  return NetworkIndex(net).tailup_weight(p, q);
}

}  // namespace streamcov

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "streamcov/error.hpp"

namespace streamcov {

using VertexId = std::int64_t;
using EdgeId = std::int64_t;

struct Edge {
  EdgeId id = 0;
  VertexId tail = 0;  // upstream endpoint when the network is directed
  VertexId head = 0;  // downstream endpoint when the network is directed
  double length = 1.0;
  double omega = 1.0;  // additive flow weight of the hosting segment
};

/// A graph with Euclidean edges: a finite simple connected graph whose edges
/// carry lengths, so that every interior position on an edge is a spatial
/// location.  When `directed` is set the graph must be a tree and every edge
/// must point toward the unique outlet (stream semantics).
struct Network {
  std::vector<VertexId> vertices;  // may be left empty; derived from edges
  std::vector<Edge> edges;
  std::optional<VertexId> outlet;
  bool directed = false;
};

/// A location addressed as (edge, offset), offset measured from the tail
/// (upstream) endpoint.  Vertex locations are encoded as offset 0 or the
/// full edge length.
struct PointOnNetwork {
  EdgeId edge = 0;
  double offset = 0.0;
};

enum class FlowKind { SamePoint, Connected, Unconnected };

/// How two sites on a directed tree relate through the flow.  For an
/// unconnected pair, a and b are the distances from each site to the common
/// junction downstream of both, ordered so that b >= a, with d = a + b.
struct FlowRelation {
  FlowKind kind = FlowKind::SamePoint;
  double d = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// Checks the structural invariants: finite simple connected graph, positive
/// lengths and omegas, and (when directed) tree shape with every edge
/// oriented toward the outlet.  Throws Error on violation; returns warnings
/// for soft issues (omega additivity at junctions).
std::vector<std::string> validate_network(const Network& net);

/// Immutable query structure built once per network: adjacency, vertex-pair
/// shortest path distances, and (when directed) the downstream chains used
/// for flow relations.  Safe for concurrent read access.
class NetworkIndex {
 public:
  explicit NetworkIndex(const Network& net);

  const Network& net() const { return net_; }
  int vertex_count() const { return static_cast<int>(vids_.size()); }
  int edge_count() const { return static_cast<int>(net_.edges.size()); }

  /// Degree-1 vertices, the outlet included when it has degree 1.
  int leaf_count() const { return leaf_count_; }

  double geodesic(const PointOnNetwork& p, const PointOnNetwork& q) const;
  double resistance(const PointOnNetwork& p, const PointOnNetwork& q) const;
  FlowRelation flow_relation(const PointOnNetwork& p, const PointOnNetwork& q) const;
  double tailup_weight(const PointOnNetwork& p, const PointOnNetwork& q) const;

  bool same_point(const PointOnNetwork& p, const PointOnNetwork& q) const;
  bool directed() const { return net_.directed; }

  const Edge& edge_by_id(EdgeId e) const;
  double edge_omega(EdgeId e) const { return edge_by_id(e).omega; }
  void check_point(const PointOnNetwork& p) const;

 private:
  struct Canon {               // canonical form of a point
    bool at_vertex = false;
    int v = -1;                // vertex slot when at_vertex
    int e = -1;                // edge slot otherwise
    double off = 0.0;
  };

  Canon canon(const PointOnNetwork& p) const;
  int vslot(VertexId v) const;
  int eslot(EdgeId e) const;
  bool is_down_ancestor(int anc, int v) const;  // anc lies on v's path to the outlet

  Network net_;
  std::vector<VertexId> vids_;                   // slot -> id
  std::unordered_map<VertexId, int> vslot_;      // id -> slot
  std::unordered_map<EdgeId, int> eslot_;        // id -> edge index in net_.edges
  std::vector<std::vector<std::pair<int, int>>> adj_;  // vertex slot -> (edge idx, other slot)
  std::vector<std::vector<double>> vdist_;       // vertex-pair shortest distances
  int leaf_count_ = 0;

  // directed-tree structure, rooted at the outlet
  int outlet_slot_ = -1;
  std::vector<int> parent_;       // next vertex toward the outlet (-1 at outlet)
  std::vector<int> parent_edge_;  // edge carrying the flow out of each vertex
  std::vector<double> down_dist_;
};

// One-shot wrappers; each builds a NetworkIndex internally.  Prefer the index
// (or a PairTable) when evaluating many pairs.
double geodesic_distance(const Network& net, const PointOnNetwork& p, const PointOnNetwork& q);
double resistance_distance(const Network& net, const PointOnNetwork& p, const PointOnNetwork& q);
FlowRelation flow_relation(const Network& net, const PointOnNetwork& p, const PointOnNetwork& q);
double tailup_weight(const Network& net, const PointOnNetwork& p, const PointOnNetwork& q);

}  // namespace streamcov

#pragma once

#include <vector>

#include "streamcov/network.hpp"
#include "streamcov/rng.hpp"

namespace streamcov {

/// Random directed tree with the given number of edges: each new vertex
/// attaches below an existing one, edges point toward the outlet (vertex 0),
/// lengths are uniform on [len_lo, len_hi], and omegas accumulate additively
/// from the leaves so the flow-weight warnings stay silent.
Network random_tree(Rng& rng, int n_edges, double len_lo = 0.25, double len_hi = 2.0,
                    bool directed = true);

/// Uniformly random locations: edge chosen by length, offset uniform.
std::vector<PointOnNetwork> random_points(const Network& net, Rng& rng, int count);

std::vector<double> random_times(Rng& rng, int count, double t_max = 5.0);

}  // namespace streamcov

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "vaxsim/graph.hpp"

namespace vaxsim {

struct CentralityScores {
    std::vector<double> scores;
};

/// Unnormalized betweenness centrality (Brandes' accumulation, unweighted).
///
/// Each unordered pair {s, t} contributes once: the per-source dependencies
/// sum over ordered pairs and are halved at the end. Disconnected pairs
/// contribute nothing.
inline CentralityScores betweenness(const Graph& g) {
    const std::size_t n = g.node_count();
    std::vector<double> cb(n, 0.0);
    std::vector<double> sigma(n);
    std::vector<double> delta(n);
    std::vector<std::int64_t> dist(n);
    std::vector<NodeId> order;
    order.reserve(n);

    for (NodeId s = 0; s < n; ++s) {
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        std::fill(dist.begin(), dist.end(), -1);
        order.clear();

        sigma[s] = 1.0;
        dist[s] = 0;
        order.push_back(s);
        // `order` doubles as the BFS queue; visiting order is non-decreasing distance.
        for (std::size_t head = 0; head < order.size(); ++head) {
            const NodeId v = order[head];
            for (NodeId w : g.neighbors(v)) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    order.push_back(w);
                }
                if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
            }
        }
        for (std::size_t k = order.size(); k-- > 1;) {
            const NodeId w = order[k];
            const double coeff = (1.0 + delta[w]) / sigma[w];
            for (NodeId v : g.neighbors(w)) {
                if (dist[v] == dist[w] - 1) delta[v] += sigma[v] * coeff;
            }
            cb[w] += delta[w];
        }
    }
    for (auto& x : cb) x *= 0.5;
    return {std::move(cb)};
}

}  // namespace vaxsim

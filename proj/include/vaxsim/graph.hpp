#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vaxsim/rng.hpp"

namespace vaxsim {

using NodeId = std::uint32_t;

/// Invalid parameters or malformed input. Raised before any simulation work.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Static undirected simple graph in compressed adjacency form.
/// Neighbor lists are sorted; the graph is immutable once built.
class Graph {
  public:
    Graph() = default;

    /// Builds from an undirected edge list. Throws ConfigError on self-loops,
    /// duplicate edges or out-of-range endpoints.
    Graph(std::size_t node_count, std::span<const std::pair<NodeId, NodeId>> edges)
        : offsets_(node_count + 1, 0), edge_count_(edges.size()) {
        for (auto [u, v] : edges) {
            if (u >= node_count || v >= node_count) {
                throw ConfigError("edge endpoint out of range");
            }
            if (u == v) {
                throw ConfigError("self-loop at node " + std::to_string(u));
            }
            ++offsets_[u + 1];
            ++offsets_[v + 1];
        }
        for (std::size_t i = 0; i < node_count; ++i) {
            offsets_[i + 1] += offsets_[i];
        }
        neighbors_.resize(offsets_.back());
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (auto [u, v] : edges) {
            neighbors_[fill[u]++] = v;
            neighbors_[fill[v]++] = u;
        }
        for (std::size_t i = 0; i < node_count; ++i) {
            auto first = neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
            auto last = neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
            std::sort(first, last);
            if (std::adjacent_find(first, last) != last) {
                throw ConfigError("duplicate edge at node " + std::to_string(i));
            }
        }
    }

    std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t edge_count() const noexcept { return edge_count_; }

    std::span<const NodeId> neighbors(NodeId i) const noexcept {
        return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }

    std::size_t degree(NodeId i) const noexcept { return offsets_[i + 1] - offsets_[i]; }

    std::size_t max_degree() const noexcept {
        std::size_t m = 0;
        for (std::size_t i = 0; i + 1 < offsets_.size(); ++i) {
            m = std::max(m, offsets_[i + 1] - offsets_[i]);
        }
        return m;
    }

    bool has_edge(NodeId u, NodeId v) const noexcept {
        auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    /// Edges with u < v, in lexicographic order.
    std::vector<std::pair<NodeId, NodeId>> edges() const {
        std::vector<std::pair<NodeId, NodeId>> out;
        out.reserve(edge_count_);
        for (NodeId u = 0; u < node_count(); ++u) {
            for (NodeId v : neighbors(u)) {
                if (u < v) out.emplace_back(u, v);
            }
        }
        return out;
    }

  private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> neighbors_;
    std::size_t edge_count_ = 0;
};

/// Watts-Strogatz small-world graph.
///
/// Starts from the ring lattice where node i links to its mean_degree/2
/// clockwise neighbors, then visits lattice edges lap by lap (all offset-1
/// edges, then offset-2, ...) and with probability rewire_prob moves the far
/// endpoint to a uniform node that is neither i nor already adjacent to i.
/// One Bernoulli draw is consumed per lattice edge whatever the outcome, so a
/// given stream yields aligned graphs across rewire_prob values.
inline Graph generate_watts_strogatz(std::size_t n, std::size_t mean_degree, double rewire_prob, Rng& rng) {
    if (n == 0) throw ConfigError("watts-strogatz: n must be positive");
    if (mean_degree == 0 || mean_degree % 2 != 0) throw ConfigError("watts-strogatz: mean degree must be even and positive");
    if (mean_degree >= n) throw ConfigError("watts-strogatz: mean degree must be below n");
    if (!(rewire_prob >= 0.0 && rewire_prob <= 1.0)) throw ConfigError("watts-strogatz: rewire probability outside [0,1]");
    if (n > UINT32_MAX) throw ConfigError("watts-strogatz: n too large");

    const std::size_t half = mean_degree / 2;
    std::vector<std::vector<NodeId>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        adj[i].reserve(mean_degree + 4);
        for (std::size_t j = 1; j <= half; ++j) {
            adj[i].push_back(static_cast<NodeId>((i + j) % n));
            adj[i].push_back(static_cast<NodeId>((i + n - j) % n));
        }
    }
    auto contains = [&](NodeId u, NodeId v) { return std::find(adj[u].begin(), adj[u].end(), v) != adj[u].end(); };
    auto erase_one = [&](NodeId u, NodeId v) {
        auto it = std::find(adj[u].begin(), adj[u].end(), v);
        *it = adj[u].back();
        adj[u].pop_back();
    };

    for (std::size_t j = 1; j <= half; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const bool rewire = rng.bernoulli(rewire_prob);
            if (!rewire) continue;
            const auto u = static_cast<NodeId>(i);
            const auto old = static_cast<NodeId>((i + j) % n);
            // No free target: the edge stays in place.
            if (adj[u].size() >= n - 1) continue;
            NodeId w;
            do {
                w = static_cast<NodeId>(rng.uniform_index(n));
            } while (w == u || contains(u, w));
            erase_one(u, old);
            erase_one(old, u);
            adj[u].push_back(w);
            adj[w].push_back(u);
        }
    }

    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(n * half);
    for (std::size_t u = 0; u < n; ++u) {
        for (NodeId v : adj[u]) {
            if (u < v) edges.emplace_back(static_cast<NodeId>(u), v);
        }
    }
    return Graph(n, edges);
}

/// One "i j" line per edge (i < j), 0-indexed.
inline void write_edge_list(const Graph& g, std::ostream& out) {
    for (auto [u, v] : g.edges()) {
        out << u << ' ' << v << '\n';
    }
}

}  // namespace vaxsim

#pragma once

// Brute-force reference computations used by the test suites and by the
// `oracle` CLI subcommand. Nothing here shares code paths with the
// production algorithms they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "vaxsim/campaigns.hpp"
#include "vaxsim/epidemic.hpp"
#include "vaxsim/graph.hpp"
#include "vaxsim/opinion.hpp"

namespace vaxsim::oracle {

namespace detail {

inline std::vector<int> bfs_distances(const Graph& g, NodeId s) {
    std::vector<int> d(g.node_count(), -1);
    std::deque<NodeId> q{s};
    d[s] = 0;
    while (!q.empty()) {
        const NodeId v = q.front();
        q.pop_front();
        for (NodeId w : g.neighbors(v)) {
            if (d[w] < 0) {
                d[w] = d[v] + 1;
                q.push_back(w);
            }
        }
    }
    return d;
}

// Walks every shortest s-t path explicitly, counting visits to interior nodes.
inline void enumerate_paths(const Graph& g, NodeId v, NodeId t, const std::vector<int>& ds, const std::vector<int>& dt,
                            int total, std::vector<NodeId>& path, std::vector<double>& through, double& count) {
    if (v == t) {
        count += 1.0;
        for (std::size_t i = 1; i + 1 < path.size(); ++i) through[path[i]] += 1.0;
        return;
    }
    for (NodeId w : g.neighbors(v)) {
        if (ds[w] == ds[v] + 1 && dt[w] >= 0 && ds[w] + dt[w] == total) {
            path.push_back(w);
            enumerate_paths(g, w, t, ds, dt, total, path, through, count);
            path.pop_back();
        }
    }
}

}  // namespace detail

/// Betweenness by enumerating all shortest paths of all ordered pairs and
/// crediting each interior node with its share; halved for unordered pairs.
inline std::vector<double> brute_force_betweenness(const Graph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::vector<int>> dist(n);
    for (NodeId s = 0; s < n; ++s) dist[s] = detail::bfs_distances(g, s);
    std::vector<double> cb(n, 0.0);
    std::vector<double> through(n);
    std::vector<NodeId> path;
    for (NodeId s = 0; s < n; ++s) {
        for (NodeId t = 0; t < n; ++t) {
            if (s == t || dist[s][t] < 0) continue;
            std::fill(through.begin(), through.end(), 0.0);
            double count = 0.0;
            path.assign(1, s);
            detail::enumerate_paths(g, s, t, dist[s], dist[t], dist[s][t], path, through, count);
            for (NodeId v = 0; v < n; ++v) cb[v] += through[v] / count;
        }
    }
    for (auto& x : cb) x *= 0.5;
    return cb;
}

/// Exact expected epidemic size of the synchronous discrete-time SIR chain,
/// for tiny graphs (states are enumerated exhaustively).
class SirChain {
  public:
    SirChain(const Graph& g, double beta, double gamma) : g_(&g), beta_(beta), gamma_(gamma) {}

    /// Expected final recovered count starting from `state`.
    double expected_final_size(const std::vector<DiseaseState>& state) {
        const std::uint64_t key = encode(state);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;

        std::vector<NodeId> inf;
        std::vector<NodeId> exposed;     // susceptible with at least one infected neighbor
        std::vector<double> p_infect;
        std::size_t recovered = 0;
        for (NodeId i = 0; i < state.size(); ++i) {
            if (state[i] == DiseaseState::infected) inf.push_back(i);
            if (state[i] == DiseaseState::recovered) ++recovered;
        }
        if (inf.empty()) return memo_[key] = static_cast<double>(recovered);
        for (NodeId i = 0; i < state.size(); ++i) {
            if (state[i] != DiseaseState::susceptible) continue;
            int m = 0;
            for (NodeId j : g_->neighbors(i)) m += state[j] == DiseaseState::infected ? 1 : 0;
            if (m > 0) {
                exposed.push_back(i);
                p_infect.push_back(1.0 - std::pow(1.0 - beta_, m));
            }
        }

        // Enumerate joint outcomes: each exposed node infected or not, each
        // infected node recovered or not.
        const std::size_t bits = exposed.size() + inf.size();
        double p_stay = 0.0;
        double acc = 0.0;
        for (std::uint64_t mask = 0; mask < (1ULL << bits); ++mask) {
            double prob = 1.0;
            std::vector<DiseaseState> next = state;
            for (std::size_t e = 0; e < exposed.size(); ++e) {
                const bool hit = (mask >> e) & 1ULL;
                prob *= hit ? p_infect[e] : 1.0 - p_infect[e];
                if (hit) next[exposed[e]] = DiseaseState::infected;
            }
            for (std::size_t r = 0; r < inf.size(); ++r) {
                const bool rec = (mask >> (exposed.size() + r)) & 1ULL;
                prob *= rec ? gamma_ : 1.0 - gamma_;
                if (rec) next[inf[r]] = DiseaseState::recovered;
            }
            if (prob == 0.0) continue;
            if (mask == 0) {
                p_stay += prob;  // nothing happened
            } else {
                acc += prob * expected_final_size(next);
            }
        }
        return memo_[key] = acc / (1.0 - p_stay);
    }

    /// Seeds one uniform susceptible node, as the simulator does with I0 = 1.
    double expected_size_uniform_seed(const std::vector<DiseaseState>& initial) {
        double total = 0.0;
        std::size_t count = 0;
        for (NodeId i = 0; i < initial.size(); ++i) {
            if (initial[i] != DiseaseState::susceptible) continue;
            auto s = initial;
            s[i] = DiseaseState::infected;
            total += expected_final_size(s);
            ++count;
        }
        return count ? total / static_cast<double>(count) : 0.0;
    }

  private:
    static std::uint64_t encode(const std::vector<DiseaseState>& s) {
        std::uint64_t k = 0;
        for (auto v : s) k = k * 4 + static_cast<std::uint64_t>(v);
        return k;
    }

    const Graph* g_;
    double beta_;
    double gamma_;
    std::map<std::uint64_t, double> memo_;
};

/// What a correct dynamic selection must look like for one state snapshot.
struct SelectionExpectation {
    std::set<NodeId> forced;       ///< must all be selected
    std::set<NodeId> tied;         ///< exactly `tied_take` of these are selected
    std::size_t tied_take = 0;
    std::set<NodeId> fill_pool;    ///< exactly `fill_take` of these are selected
    std::size_t fill_take = 0;
};

/// Scores every neutral agent straight from the opinions and the adjacency and
/// derives which members are forced, which come from the tie at the cutoff,
/// and how many are random fill.
inline SelectionExpectation expected_adv_selection(const CampaignSpec& spec, const Graph& g,
                                                   std::span<const Opinion> opinions) {
    SelectionExpectation ex;
    std::vector<NodeId> neutrals;
    for (NodeId i = 0; i < opinions.size(); ++i) {
        if (opinions[i] == Opinion::neutral) neutrals.push_back(i);
    }
    const std::size_t t = spec.target_size;
    if (neutrals.size() <= t) {
        ex.forced.insert(neutrals.begin(), neutrals.end());
        return ex;
    }
    std::vector<std::pair<long, NodeId>> scored;
    std::vector<NodeId> rest;
    for (NodeId i : neutrals) {
        long neg = 0;
        long neu = 0;
        for (NodeId j : g.neighbors(i)) {
            neg += opinions[j] == Opinion::negative ? 1 : 0;
            neu += opinions[j] == Opinion::neutral ? 1 : 0;
        }
        const bool eligible = spec.adv_pool == AdvPool::all_neutral || neg >= 1;
        if (!eligible) {
            rest.push_back(i);
            continue;
        }
        long score = std::labs(neg - spec.zeta);
        if (spec.strategy == Strategy::adv_mult_locl_info) score += std::labs(neu - spec.z_target);
        scored.emplace_back(score, i);
    }
    std::sort(scored.begin(), scored.end());
    if (scored.size() <= t) {
        for (auto& [s, i] : scored) ex.forced.insert(i);
        ex.fill_pool.insert(rest.begin(), rest.end());
        ex.fill_take = t - scored.size();
        return ex;
    }
    const long cutoff = scored[t - 1].first;
    for (auto& [s, i] : scored) {
        if (s < cutoff) ex.forced.insert(i);
        else if (s == cutoff) ex.tied.insert(i);
    }
    ex.tied_take = t - ex.forced.size();
    return ex;
}

/// True when `selected` is consistent with the expectation.
inline bool matches(const SelectionExpectation& ex, std::span<const NodeId> selected) {
    std::set<NodeId> sel(selected.begin(), selected.end());
    if (sel.size() != selected.size()) return false;
    if (sel.size() != ex.forced.size() + ex.tied_take + ex.fill_take) return false;
    std::size_t from_tied = 0;
    std::size_t from_fill = 0;
    for (NodeId f : ex.forced) {
        if (!sel.count(f)) return false;
    }
    for (NodeId s : sel) {
        if (ex.forced.count(s)) continue;
        if (ex.tied.count(s)) ++from_tied;
        else if (ex.fill_pool.count(s)) ++from_fill;
        else return false;
    }
    return from_tied == ex.tied_take && from_fill == ex.fill_take;
}

}  // namespace vaxsim::oracle

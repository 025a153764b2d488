#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vaxsim/vaxsim.hpp"

namespace vaxsim::fixtures {

inline Graph path_graph(std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> e;
    for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return Graph(n, e);
}

inline Graph star_graph(std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> e;
    for (NodeId i = 1; i < n; ++i) e.emplace_back(0, i);
    return Graph(n, e);
}

inline Graph complete_graph(std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> e;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return Graph(n, e);
}

/// G(n, q): every pair linked independently with probability q.
inline Graph gnp_graph(std::size_t n, double q, Rng& rng) {
    std::vector<std::pair<NodeId, NodeId>> e;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            if (rng.bernoulli(q)) e.emplace_back(i, j);
    return Graph(n, e);
}

/// Drives an OpinionProcess with random parameters and random allocations and
/// checks every step against the step contract, using a snapshot taken just
/// before the step:
///  - non-neutral agents keep their state and counters (absorbing, frozen);
///  - counters never decrease and grow by at most one general exposure plus
///    one social exposure per opinionated neighbor in the snapshot, so an
///    agent flipping at step t adds nothing before t+1 (synchronicity);
///  - the new state of each previously neutral agent is exactly the threshold
///    rule applied to its counters;
///  - neutral + positive + negative = N, and the neighbor tallies match a recount.
/// Returns the number of steps checked; `failure` receives the first violation.
inline std::size_t check_random_opinion_steps(std::size_t total_steps, std::uint64_t seed, std::string& failure) {
    Rng setup(derive_key(seed, {0}));
    Rng stepper(derive_key(seed, {1}));
    std::size_t checked = 0;
    std::size_t round = 0;
    while (checked < total_steps) {
        ++round;
        const std::size_t n = 5 + setup.uniform_index(40);
        const Graph g = gnp_graph(n, 0.05 + 0.3 * setup.uniform(), setup);
        OpinionParams params;
        params.mu_neg = setup.uniform() * 0.3;
        params.omega_neg = setup.uniform() * 0.6;
        params.omega_pos = setup.uniform() * 0.6;
        params.theta = 1 + static_cast<int>(setup.uniform_index(3));
        OpinionProcess proc(g, params);

        for (std::size_t s = 0; s < 60 && checked < total_steps; ++s, ++checked) {
            Allocation alloc;
            if (setup.bernoulli(0.5)) {
                alloc.uniform_rate = setup.uniform() * 0.3;
            } else {
                for (NodeId i = 0; i < n; ++i)
                    if (setup.bernoulli(0.3)) alloc.members.push_back(i);
                alloc.member_rate = setup.uniform();
            }
            const std::vector<AgentState> before(proc.agents().begin(), proc.agents().end());
            proc.step(alloc, stepper);
            const auto after = proc.agents();

            std::ostringstream why;
            std::size_t neu = 0, pos = 0, neg = 0;
            for (NodeId i = 0; i < n; ++i) {
                const auto& b = before[i];
                const auto& a = after[i];
                neu += a.state == Opinion::neutral;
                pos += a.state == Opinion::positive;
                neg += a.state == Opinion::negative;
                if (b.state != Opinion::neutral) {
                    if (a.state != b.state || a.phi_neg != b.phi_neg || a.phi_pos != b.phi_pos)
                        why << "agent " << i << " left an absorbing state or moved frozen counters";
                    continue;
                }
                if (a.phi_neg < b.phi_neg || a.phi_pos < b.phi_pos) why << "counter decreased at agent " << i;
                std::uint32_t sn_neg = 0, sn_pos = 0;
                for (NodeId j : g.neighbors(i)) {
                    sn_neg += before[j].state == Opinion::negative;
                    sn_pos += before[j].state == Opinion::positive;
                }
                const std::uint32_t gen_neg = params.mu_neg > 0.0 ? 1 : 0;
                const std::uint32_t gen_pos = alloc.rate_of(i) > 0.0 ? 1 : 0;
                const std::uint32_t soc_neg = params.omega_neg > 0.0 ? sn_neg : 0;
                const std::uint32_t soc_pos = params.omega_pos > 0.0 ? sn_pos : 0;
                if (a.phi_neg - b.phi_neg > gen_neg + soc_neg || a.phi_pos - b.phi_pos > gen_pos + soc_pos)
                    why << "agent " << i << " received more exposures than the snapshot allows";
                const long diff = static_cast<long>(a.phi_neg) - static_cast<long>(a.phi_pos);
                const Opinion expect = diff >= params.theta    ? Opinion::negative
                                       : diff <= -params.theta ? Opinion::positive
                                                               : Opinion::neutral;
                if (a.state != expect) why << "threshold rule violated at agent " << i;
                if (!why.str().empty()) break;
            }
            const auto c = proc.counts();
            if (neu + pos + neg != n || c.neutral != neu || c.positive != pos || c.negative != neg)
                why << "population counts inconsistent";
            for (NodeId i = 0; i < n; ++i) {
                std::uint32_t rn = 0, rp = 0;
                for (NodeId j : g.neighbors(i)) {
                    rn += after[j].state == Opinion::negative;
                    rp += after[j].state == Opinion::positive;
                }
                if (rn != proc.negative_neighbors(i) || rp != proc.positive_neighbors(i))
                    why << "neighbor tally mismatch at agent " << i;
            }
            if (!why.str().empty()) {
                failure = "round " + std::to_string(round) + ", step " + std::to_string(s) + ": " + why.str();
                return checked;
            }
        }
    }
    return checked;
}

}  // namespace vaxsim::fixtures

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "vaxsim/betweenness.hpp"
#include "vaxsim/graph.hpp"
#include "vaxsim/opinion.hpp"
#include "vaxsim/rng.hpp"

namespace vaxsim {

enum class Strategy : std::uint8_t {
    none,
    unif_rand,
    targt_rand,
    cntrl,
    dyn_rand,
    locl_info,
    adv_locl_info,
    adv_mult_locl_info,
};

inline constexpr std::array<Strategy, 8> kAllStrategies{
    Strategy::none,     Strategy::unif_rand, Strategy::targt_rand,    Strategy::cntrl,
    Strategy::dyn_rand, Strategy::locl_info, Strategy::adv_locl_info, Strategy::adv_mult_locl_info,
};

inline constexpr std::string_view strategy_name(Strategy s) {
    switch (s) {
        case Strategy::none: return "none";
        case Strategy::unif_rand: return "unif-rand";
        case Strategy::targt_rand: return "targt-rand";
        case Strategy::cntrl: return "cntrl";
        case Strategy::dyn_rand: return "dyn-rand";
        case Strategy::locl_info: return "locl-info";
        case Strategy::adv_locl_info: return "adv-locl-info";
        case Strategy::adv_mult_locl_info: return "adv-mult-locl-info";
    }
    return "?";
}

inline Strategy parse_strategy(std::string_view name) {
    for (Strategy s : kAllStrategies) {
        if (strategy_name(s) == name) return s;
    }
    throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

inline constexpr bool is_dynamic(Strategy s) {
    return s == Strategy::dyn_rand || s == Strategy::locl_info || s == Strategy::adv_locl_info ||
           s == Strategy::adv_mult_locl_info;
}

inline constexpr bool is_targeted(Strategy s) { return s != Strategy::none && s != Strategy::unif_rand; }

inline constexpr bool uses_zeta(Strategy s) {
    return s == Strategy::adv_locl_info || s == Strategy::adv_mult_locl_info;
}

/// Which neutral agents the Adv* strategies score before the random fill.
enum class AdvPool : std::uint8_t { frontier, all_neutral };

inline AdvPool parse_adv_pool(std::string_view name) {
    if (name == "frontier") return AdvPool::frontier;
    if (name == "all-neutral") return AdvPool::all_neutral;
    throw ConfigError("unknown adv_pool '" + std::string(name) + "'");
}

inline constexpr std::string_view adv_pool_name(AdvPool p) {
    return p == AdvPool::frontier ? "frontier" : "all-neutral";
}

struct CampaignSpec {
    Strategy strategy = Strategy::none;
    std::size_t target_size = 50;
    std::size_t update_interval = 1;
    int zeta = 1;
    int z_target = 10;
    double mu_pos = 0.0;
    AdvPool adv_pool = AdvPool::frontier;

    void validate(std::size_t n) const {
        if (!(mu_pos >= 0.0 && mu_pos <= 1.0)) throw ConfigError("mu_pos must lie in [0,1]");
        if (is_targeted(strategy)) {
            if (target_size < 1) throw ConfigError("target size T must be >= 1");
            if (target_size > n) throw ConfigError("target size T exceeds N");
        }
        if (is_dynamic(strategy) && update_interval < 1) throw ConfigError("update interval t_r must be >= 1");
        if (uses_zeta(strategy) && (zeta < 0 || z_target < 0)) throw ConfigError("zeta and Z must be non-negative");
    }
};

/// Targeted agents, sorted ascending.
struct TargetSet {
    std::vector<NodeId> members;

    bool contains(NodeId i) const { return std::binary_search(members.begin(), members.end(), i); }
    std::size_t size() const noexcept { return members.size(); }
};

struct AllocationResult {
    Allocation alloc;
    bool clamped = false;
    bool empty_targets = false;
};

/// Positive rates: mu_pos for everyone (unif-rand), nothing (none), or
/// mu_pos * N / |targets| on each target, capped at 1.
inline AllocationResult allocation(const CampaignSpec& spec, const TargetSet& targets, std::size_t n) {
    AllocationResult r;
    if (spec.strategy == Strategy::none) return r;
    if (spec.strategy == Strategy::unif_rand) {
        r.alloc.uniform_rate = spec.mu_pos;
        return r;
    }
    if (targets.members.empty()) {
        r.empty_targets = true;
        return r;
    }
    double rate = spec.mu_pos * static_cast<double>(n) / static_cast<double>(targets.members.size());
    if (rate > 1.0) {
        rate = 1.0;
        r.clamped = true;
    }
    r.alloc.members = targets.members;
    r.alloc.member_rate = rate;
    return r;
}

/// k distinct elements of `pool` chosen uniformly (Floyd's algorithm), appended
/// to `out`. Takes everything when k >= |pool|.
inline void sample_distinct(std::span<const NodeId> pool, std::size_t k, Rng& rng, std::vector<NodeId>& out) {
    const std::size_t n = pool.size();
    if (k >= n) {
        out.insert(out.end(), pool.begin(), pool.end());
        return;
    }
    std::unordered_set<std::size_t> chosen;
    chosen.reserve(k * 2);
    for (std::size_t j = n - k; j < n; ++j) {
        const auto t = static_cast<std::size_t>(rng.uniform_index(j + 1));
        if (chosen.insert(t).second) {
            out.push_back(pool[t]);
        } else {
            chosen.insert(j);
            out.push_back(pool[j]);
        }
    }
}

namespace detail {

/// The k lowest-scoring candidates; ties at the cutoff score broken uniformly.
inline void select_lowest(std::span<const NodeId> candidates, std::span<const std::int64_t> scores, std::size_t k,
                          Rng& rng, std::vector<NodeId>& out) {
    if (k >= candidates.size()) {
        out.insert(out.end(), candidates.begin(), candidates.end());
        return;
    }
    if (k == 0) return;
    const std::size_t before = out.size();
    std::vector<std::int64_t> sorted(scores.begin(), scores.end());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
    const std::int64_t cutoff = sorted[k - 1];
    std::vector<NodeId> tied;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (scores[i] < cutoff) out.push_back(candidates[i]);
        else if (scores[i] == cutoff) tied.push_back(candidates[i]);
    }
    sample_distinct(tied, k - (out.size() - before), rng, out);
}

}  // namespace detail

/// Static target sets, chosen once at t = 0.
///
/// targt-rand: T uniform distinct nodes. cntrl: the T highest betweenness
/// scores, with ties at the cutoff sampled uniformly.
inline TargetSet select_static(const CampaignSpec& spec, const Graph& g, const CentralityScores* centrality, Rng& rng) {
    TargetSet ts;
    const std::size_t n = g.node_count();
    const std::size_t t = std::min(spec.target_size, n);
    if (spec.strategy == Strategy::targt_rand) {
        std::vector<NodeId> all(n);
        std::iota(all.begin(), all.end(), NodeId{0});
        sample_distinct(all, t, rng, ts.members);
    } else if (spec.strategy == Strategy::cntrl) {
        if (centrality == nullptr || centrality->scores.size() != n) {
            throw ConfigError("cntrl strategy needs betweenness scores for every node");
        }
        const auto& sc = centrality->scores;
        std::vector<double> sorted(sc);
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(t - 1), sorted.end(),
                         std::greater<>());
        const double cutoff = sorted[t - 1];
        std::vector<NodeId> tied;
        for (NodeId i = 0; i < n; ++i) {
            if (sc[i] > cutoff) ts.members.push_back(i);
            else if (sc[i] == cutoff) tied.push_back(i);
        }
        sample_distinct(tied, t - ts.members.size(), rng, ts.members);
    } else {
        throw ConfigError("select_static called for a non-static strategy");
    }
    std::sort(ts.members.begin(), ts.members.end());
    return ts;
}

/// Adv* score: |n- - zeta|, plus |n0 - Z| for the multi-objective variant.
inline std::int64_t adv_score(const CampaignSpec& spec, std::uint32_t n_neg, std::uint32_t n_neutral) {
    std::int64_t g = std::llabs(static_cast<std::int64_t>(n_neg) - spec.zeta);
    if (spec.strategy == Strategy::adv_mult_locl_info) g += std::llabs(static_cast<std::int64_t>(n_neutral) - spec.z_target);
    return g;
}

/// Dynamic target sets, resampled from the current neutral population.
///
/// dyn-rand samples neutrals uniformly. locl-info samples the frontier
/// (neutrals with at least one negative neighbor). The Adv* strategies take
/// the T lowest scores from their pool. All three fill any shortfall with
/// uniform picks among the remaining neutrals; with fewer than T neutrals
/// left, all of them are taken.
inline TargetSet select_dynamic(const CampaignSpec& spec, const OpinionProcess& process, Rng& rng) {
    TargetSet ts;
    const auto neutrals = process.neutral_agents();
    const std::size_t t = spec.target_size;
    if (neutrals.size() <= t) {
        ts.members.assign(neutrals.begin(), neutrals.end());
        std::sort(ts.members.begin(), ts.members.end());
        return ts;
    }

    if (spec.strategy == Strategy::dyn_rand) {
        sample_distinct(neutrals, t, rng, ts.members);
        std::sort(ts.members.begin(), ts.members.end());
        return ts;
    }
    if (!is_dynamic(spec.strategy)) throw ConfigError("select_dynamic called for a non-dynamic strategy");

    const bool all_neutral_pool = uses_zeta(spec.strategy) && spec.adv_pool == AdvPool::all_neutral;
    std::vector<NodeId> pool;
    std::vector<NodeId> rest;
    for (NodeId i : neutrals) {
        if (all_neutral_pool || process.negative_neighbors(i) >= 1) pool.push_back(i);
        else rest.push_back(i);
    }

    if (spec.strategy == Strategy::locl_info) {
        sample_distinct(pool, t, rng, ts.members);
    } else {
        std::vector<std::int64_t> scores;
        scores.reserve(pool.size());
        for (NodeId i : pool) scores.push_back(adv_score(spec, process.negative_neighbors(i), process.neutral_neighbors(i)));
        detail::select_lowest(pool, scores, t, rng, ts.members);
    }
    if (ts.members.size() < t) sample_distinct(rest, t - ts.members.size(), rng, ts.members);
    std::sort(ts.members.begin(), ts.members.end());
    return ts;
}

/// Per-run campaign controller: owns the target set and its random stream,
/// and yields the allocation before every opinion step.
class Campaign {
  public:
    Campaign(CampaignSpec spec, const Graph& g, const CentralityScores* centrality, Rng rng)
        : spec_(spec), graph_(&g), centrality_(centrality), rng_(std::move(rng)) {
        spec_.validate(g.node_count());
    }

    const Allocation& before_step(std::size_t step, const OpinionProcess& process) {
        const bool first = !initialized_;
        initialized_ = true;
        if (first && !is_dynamic(spec_.strategy)) {
            if (is_targeted(spec_.strategy)) targets_ = select_static(spec_, *graph_, centrality_, rng_);
            refresh_allocation();
        } else if (is_dynamic(spec_.strategy) && (first || step % spec_.update_interval == 0)) {
            targets_ = select_dynamic(spec_, process, rng_);
            ++retargets_;
            refresh_allocation();
        }
        return alloc_;
    }

    const CampaignSpec& spec() const noexcept { return spec_; }
    double mu_pos() const noexcept { return spec_.strategy == Strategy::none ? 0.0 : spec_.mu_pos; }
    const TargetSet& targets() const noexcept { return targets_; }
    const Allocation& current_allocation() const noexcept { return alloc_; }
    std::size_t clamp_events() const noexcept { return clamp_events_; }
    std::size_t empty_target_events() const noexcept { return empty_events_; }
    std::size_t retargets() const noexcept { return retargets_; }

  private:
    void refresh_allocation() {
        auto r = allocation(spec_, targets_, graph_->node_count());
        alloc_ = std::move(r.alloc);
        clamp_events_ += r.clamped ? 1 : 0;
        empty_events_ += r.empty_targets ? 1 : 0;
    }

    CampaignSpec spec_;
    const Graph* graph_;
    const CentralityScores* centrality_;
    Rng rng_;
    TargetSet targets_;
    Allocation alloc_;
    bool initialized_ = false;
    std::size_t clamp_events_ = 0;
    std::size_t empty_events_ = 0;
    std::size_t retargets_ = 0;
};

}  // namespace vaxsim

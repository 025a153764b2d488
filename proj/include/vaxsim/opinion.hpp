#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "vaxsim/graph.hpp"
#include "vaxsim/rng.hpp"

namespace vaxsim {

enum class Opinion : std::uint8_t { neutral = 0, negative = 1, positive = 2 };

/// Opinion state plus the exposure counters. Counters only move while the
/// agent is neutral; a non-neutral state is absorbing.
struct AgentState {
    Opinion state = Opinion::neutral;
    std::uint32_t phi_neg = 0;
    std::uint32_t phi_pos = 0;
};

struct OpinionParams {
    double mu_neg = 0.001;
    double omega_neg = 0.0;
    double omega_pos = 0.0;
    int theta = 2;
    /// Step limit; empty means run until no neutral agent is left.
    std::optional<std::size_t> tau;

    void validate() const {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!prob(mu_neg) || !prob(omega_neg) || !prob(omega_pos)) throw ConfigError("opinion rates must lie in [0,1]");
        if (theta < 1) throw ConfigError("theta must be >= 1");
        if (tau && *tau < 1) throw ConfigError("tau must be >= 1 when finite");
    }

    /// Hard stop for the run-to-absorption case: 100 * ceil(theta / mu), with
    /// mu the negative rate, or the positive campaign mean if mu_neg is zero.
    std::size_t safety_cap(double mu_pos_mean) const {
        const double mu = mu_neg > 0.0 ? mu_neg : mu_pos_mean;
        if (mu <= 0.0) return 100 * static_cast<std::size_t>(theta);
        return 100 * static_cast<std::size_t>(std::ceil(theta / mu));
    }
};

/// Per-agent positive rates for one step. Either uniform over everyone or
/// `member_rate` on `members` only (zero elsewhere).
struct Allocation {
    double uniform_rate = 0.0;
    std::vector<NodeId> members;
    double member_rate = 0.0;

    double rate_of(NodeId i) const {
        if (uniform_rate > 0.0) return uniform_rate;
        return std::binary_search(members.begin(), members.end(), i) ? member_rate : 0.0;
    }

    std::vector<double> dense(std::size_t n) const {
        std::vector<double> out(n, uniform_rate);
        for (NodeId m : members) out[m] = member_rate;
        return out;
    }
};

struct OpinionCounts {
    std::size_t neutral = 0;
    std::size_t positive = 0;
    std::size_t negative = 0;
};

struct OpinionTrace {
    /// counts[0] is the initial population, counts[t] the state after step t.
    std::vector<OpinionCounts> counts;
    std::vector<Opinion> final_states;
    std::size_t steps = 0;
    bool cap_hit = false;
};

struct StepResult {
    std::vector<NodeId> became_negative;
    std::vector<NodeId> became_positive;
};

namespace detail {

/// Inverse-CDF sampler for Binomial(n, p) over n <= max_n.
class BinomialTable {
  public:
    BinomialTable() = default;
    BinomialTable(double p, std::size_t max_n) : p_(p), max_n_(max_n) {
        cdf_.resize((max_n + 1) * (max_n + 1), 1.0);
        for (std::size_t n = 0; n <= max_n; ++n) {
            double* row = &cdf_[n * (max_n + 1)];
            double acc = 0.0;
            for (std::size_t k = 0; k <= n; ++k) {
                const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
                double pmf;
                if (p <= 0.0) pmf = k == 0 ? 1.0 : 0.0;
                else if (p >= 1.0) pmf = k == n ? 1.0 : 0.0;
                else pmf = std::exp(lc + k * std::log(p) + (n - k) * std::log1p(-p));
                acc += pmf;
                row[k] = acc;
            }
            row[n] = 1.0;
        }
    }

    std::uint32_t sample(std::size_t n, Rng& rng) const {
        if (p_ <= 0.0) return 0;
        if (p_ >= 1.0) return static_cast<std::uint32_t>(n);
        const double u = rng.uniform();
        const double* row = &cdf_[n * (max_n_ + 1)];
        std::uint32_t k = 0;
        while (u >= row[k] && k < n) ++k;
        return k;
    }

  private:
    double p_ = 0.0;
    std::size_t max_n_ = 0;
    std::vector<double> cdf_;
};

}  // namespace detail

/// Dual-contagion threshold process on a fixed graph.
///
/// Each step draws all exposures against the state at the start of the step
/// (negative general, positive general, then social), then applies the
/// threshold rule to every touched neutral agent at once. Agents that flip
/// in step t influence their neighbors from step t+1 on.
class OpinionProcess {
  public:
    OpinionProcess(const Graph& g, const OpinionParams& params)
        : graph_(&g),
          params_(params),
          agents_(g.node_count()),
          n_neg_(g.node_count(), 0),
          n_pos_(g.node_count(), 0),
          neutral_pos_(g.node_count()),
          touched_mark_(g.node_count(), 0) {
        params_.validate();
        neutral_.resize(g.node_count());
        for (NodeId i = 0; i < g.node_count(); ++i) {
            neutral_[i] = i;
            neutral_pos_[i] = i;
        }
        const std::size_t dmax = g.max_degree();
        social_neg_ = detail::BinomialTable(params.omega_neg, dmax);
        social_pos_ = detail::BinomialTable(params.omega_pos, dmax);
        log_q_neg_ = params.mu_neg > 0.0 && params.mu_neg < 1.0 ? std::log1p(-params.mu_neg) : 0.0;
    }

    const Graph& graph() const noexcept { return *graph_; }
    const OpinionParams& params() const noexcept { return params_; }
    std::size_t node_count() const noexcept { return agents_.size(); }
    std::span<const AgentState> agents() const noexcept { return agents_; }
    Opinion state(NodeId i) const noexcept { return agents_[i].state; }

    std::uint32_t negative_neighbors(NodeId i) const noexcept { return n_neg_[i]; }
    std::uint32_t positive_neighbors(NodeId i) const noexcept { return n_pos_[i]; }
    std::uint32_t neutral_neighbors(NodeId i) const noexcept {
        return static_cast<std::uint32_t>(graph_->degree(i)) - n_neg_[i] - n_pos_[i];
    }

    /// Currently neutral agents, in an unspecified but deterministic order.
    std::span<const NodeId> neutral_agents() const noexcept { return neutral_; }

    OpinionCounts counts() const noexcept {
        return {neutral_.size(), positive_count_, agents_.size() - neutral_.size() - positive_count_};
    }

    /// Test and scenario setup: force an opinion (neighbor tallies follow).
    /// Only neutral agents can be changed.
    void set_opinion(NodeId i, Opinion o) {
        if (agents_[i].state != Opinion::neutral || o == Opinion::neutral) return;
        flip(i, o);
    }

    void set_counters(NodeId i, std::uint32_t phi_neg, std::uint32_t phi_pos) {
        agents_[i].phi_neg = phi_neg;
        agents_[i].phi_pos = phi_pos;
    }

    StepResult step(const Allocation& alloc, Rng& rng) {
        touched_.clear();

        // General negative exposure, rate mu_neg per neutral agent.
        sample_uniform(params_.mu_neg, log_q_neg_, rng, [&](NodeId i) { expose(i, true); });

        // General positive exposure.
        if (alloc.uniform_rate > 0.0) {
            const double p = alloc.uniform_rate;
            const double lq = p < 1.0 ? std::log1p(-p) : 0.0;
            sample_uniform(p, lq, rng, [&](NodeId i) { expose(i, false); });
        }
        for (NodeId m : alloc.members) {
            const bool hit = rng.bernoulli(alloc.member_rate);
            if (hit && agents_[m].state == Opinion::neutral) expose(m, false);
        }

        // Social exposure: one independent draw per opinionated neighbor,
        // summed as a binomial over the neighbor tally.
        for (NodeId i : neutral_) {
            if (n_neg_[i] > 0) {
                const auto k = social_neg_.sample(n_neg_[i], rng);
                if (k > 0) expose(i, true, k);
            }
            if (n_pos_[i] > 0) {
                const auto k = social_pos_.sample(n_pos_[i], rng);
                if (k > 0) expose(i, false, k);
            }
        }

        StepResult result;
        const auto theta = static_cast<std::int64_t>(params_.theta);
        for (NodeId i : touched_) {
            touched_mark_[i] = 0;
            const auto diff = static_cast<std::int64_t>(agents_[i].phi_neg) - agents_[i].phi_pos;
            if (diff >= theta) result.became_negative.push_back(i);
            else if (diff <= -theta) result.became_positive.push_back(i);
        }
        for (NodeId i : result.became_negative) flip(i, Opinion::negative);
        for (NodeId i : result.became_positive) flip(i, Opinion::positive);
        ++steps_;
        return result;
    }

    std::size_t steps_taken() const noexcept { return steps_; }

  private:
    void expose(NodeId i, bool negative, std::uint32_t k = 1) {
        if (negative) agents_[i].phi_neg += k;
        else agents_[i].phi_pos += k;
        if (!touched_mark_[i]) {
            touched_mark_[i] = 1;
            touched_.push_back(i);
        }
    }

    /// Bernoulli(p) for every current neutral agent via geometric skips.
    template <class F>
    void sample_uniform(double p, double log_q, Rng& rng, F&& hit) {
        if (p <= 0.0) return;
        const std::size_t count = neutral_.size();
        if (p >= 1.0) {
            for (std::size_t k = 0; k < count; ++k) hit(neutral_[k]);
            return;
        }
        std::uint64_t k = rng.geometric_skip(log_q);
        while (k < count) {
            hit(neutral_[k]);
            const std::uint64_t skip = rng.geometric_skip(log_q);
            if (skip >= count) break;
            k += skip + 1;
        }
    }

    void flip(NodeId i, Opinion o) {
        agents_[i].state = o;
        // swap-remove from the neutral list
        const std::size_t at = neutral_pos_[i];
        const NodeId last = neutral_.back();
        neutral_[at] = last;
        neutral_pos_[last] = static_cast<NodeId>(at);
        neutral_.pop_back();
        auto& tally = o == Opinion::negative ? n_neg_ : n_pos_;
        if (o == Opinion::positive) ++positive_count_;
        for (NodeId j : graph_->neighbors(i)) ++tally[j];
    }

    const Graph* graph_;
    OpinionParams params_;
    std::vector<AgentState> agents_;
    std::vector<std::uint32_t> n_neg_;
    std::vector<std::uint32_t> n_pos_;
    std::vector<NodeId> neutral_;
    std::vector<NodeId> neutral_pos_;
    std::vector<NodeId> touched_;
    std::vector<std::uint8_t> touched_mark_;
    std::size_t positive_count_ = 0;
    std::size_t steps_ = 0;
    detail::BinomialTable social_neg_;
    detail::BinomialTable social_pos_;
    double log_q_neg_ = 0.0;
};

/// Anything that can hand out the positive allocation for a step.
template <class C>
concept AllocationSource = requires(C c, std::size_t step, const OpinionProcess& p) {
    { c.before_step(step, p) } -> std::convertible_to<const Allocation&>;
    { c.mu_pos() } -> std::convertible_to<double>;
};

/// Runs the opinion stage from the all-neutral population.
///
/// The campaign is consulted before every step (dynamic strategies retarget
/// there). Stops after tau steps, or once no neutral agent is left when tau is
/// unbounded; in that case the safety cap ends the run and sets cap_hit.
/// `observer`, when set, sees the process right after the campaign update.
template <AllocationSource Campaign>
OpinionTrace run_opinion_stage(const Graph& g, const OpinionParams& params, Campaign& campaign, Rng& rng,
                               const std::function<void(std::size_t, const OpinionProcess&)>& observer = {}) {
    OpinionProcess process(g, params);
    OpinionTrace trace;
    trace.counts.push_back(process.counts());
    const std::size_t limit = params.tau ? *params.tau : params.safety_cap(campaign.mu_pos());

    std::size_t t = 0;
    for (; t < limit; ++t) {
        if (!params.tau && process.neutral_agents().empty()) break;
        const Allocation& alloc = campaign.before_step(t, process);
        if (observer) observer(t, process);
        process.step(alloc, rng);
        trace.counts.push_back(process.counts());
    }
    trace.steps = t;
    trace.cap_hit = !params.tau && !process.neutral_agents().empty();
    trace.final_states.reserve(g.node_count());
    for (const auto& a : process.agents()) trace.final_states.push_back(a.state);
    return trace;
}

}  // namespace vaxsim

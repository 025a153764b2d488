#include <gtest/gtest.h>

#include <map>
#include <numeric>

#include "support/fixtures.hpp"
#include "vaxsim/oracle.hpp"

using namespace vaxsim;

namespace {

CampaignSpec spec_of(Strategy s, std::size_t t, double mu) {
    CampaignSpec c;
    c.strategy = s;
    c.target_size = t;
    c.mu_pos = mu;
    return c;
}

TargetSet first_n(std::size_t t) {
    TargetSet ts;
    ts.members.resize(t);
    std::iota(ts.members.begin(), ts.members.end(), NodeId{0});
    return ts;
}

}  // namespace

TEST(Allocation, TargetRateExamples) {
    auto r = allocation(spec_of(Strategy::targt_rand, 500, 0.001), first_n(500), 5000);
    EXPECT_DOUBLE_EQ(r.alloc.member_rate, 0.01);
    EXPECT_EQ(r.alloc.rate_of(499), 0.01);
    EXPECT_EQ(r.alloc.rate_of(500), 0.0);

    r = allocation(spec_of(Strategy::targt_rand, 5000, 0.001), first_n(5000), 5000);
    EXPECT_EQ(r.alloc.member_rate, 0.001);

    r = allocation(spec_of(Strategy::dyn_rand, 50, 0.002), first_n(50), 5000);
    EXPECT_DOUBLE_EQ(r.alloc.member_rate, 0.2);
    EXPECT_FALSE(r.clamped);
}

TEST(Allocation, UniformAndNone) {
    auto r = allocation(spec_of(Strategy::unif_rand, 0, 0.002), {}, 100);
    EXPECT_EQ(r.alloc.uniform_rate, 0.002);
    r = allocation(spec_of(Strategy::none, 0, 0.002), {}, 100);
    EXPECT_EQ(r.alloc.rate_of(3), 0.0);
}

TEST(Allocation, BudgetConservedOrClamped) {
    Rng rng(3);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t n = 10 + rng.uniform_index(5000);
        const std::size_t t = 1 + rng.uniform_index(n);
        const double mu = rng.uniform() * 0.05;
        const auto r = allocation(spec_of(Strategy::locl_info, t, mu), first_n(t), n);
        double total = 0.0;
        for (double x : r.alloc.dense(n)) total += x;
        if (r.clamped) {
            EXPECT_LE(total, mu * n * (1 + 1e-12));
            EXPECT_EQ(r.alloc.member_rate, 1.0);
        } else {
            EXPECT_NEAR(total, mu * n, 1e-9 * n);
        }
    }
}

TEST(Allocation, EmptyTargetsGiveNothing) {
    const auto r = allocation(spec_of(Strategy::adv_locl_info, 50, 0.001), {}, 5000);
    EXPECT_TRUE(r.empty_targets);
    EXPECT_EQ(r.alloc.rate_of(0), 0.0);
}

TEST(StaticTargets, CentralityOnPath) {
    const Graph g = fixtures::path_graph(3);
    const auto c = betweenness(g);
    Rng rng(1);
    const auto ts = select_static(spec_of(Strategy::cntrl, 1, 0.1), g, &c, rng);
    EXPECT_EQ(ts.members, std::vector<NodeId>{1});
}

TEST(StaticTargets, CentralityTiesAreUniform) {
    const Graph g = fixtures::complete_graph(5);
    const auto c = betweenness(g);
    std::map<std::vector<NodeId>, int> freq;
    const int reps = 20000;
    for (int r = 0; r < reps; ++r) {
        Rng rng(derive_key(5, {std::uint64_t(r)}));
        const auto ts = select_static(spec_of(Strategy::cntrl, 2, 0.1), g, &c, rng);
        ASSERT_EQ(ts.size(), 2u);
        ++freq[ts.members];
    }
    ASSERT_EQ(freq.size(), 10u);
    double chi2 = 0.0;
    for (auto& [k, v] : freq) chi2 += (v - reps / 10.0) * (v - reps / 10.0) / (reps / 10.0);
    EXPECT_LT(chi2, 27.9);  // 9 dof, p ~ 0.001
}

TEST(StaticTargets, RandomTakesEveryoneWhenTEqualsN) {
    const Graph g = fixtures::path_graph(20);
    Rng rng(2);
    EXPECT_EQ(select_static(spec_of(Strategy::targt_rand, 20, 0.1), g, nullptr, rng).members, first_n(20).members);
}

TEST(StaticTargets, RandomGivesDistinctMembers) {
    Rng grng(1);
    const Graph g = generate_watts_strogatz(1000, 10, 0.01, grng);
    Rng rng(2);
    const auto ts = select_static(spec_of(Strategy::targt_rand, 500, 0.1), g, nullptr, rng);
    EXPECT_EQ(ts.size(), 500u);
    EXPECT_EQ(std::adjacent_find(ts.members.begin(), ts.members.end()), ts.members.end());
}

TEST(AdvScore, Examples) {
    auto s = spec_of(Strategy::adv_locl_info, 1, 0.1);
    s.zeta = 1;
    EXPECT_EQ(adv_score(s, 1, 5), 0);
    EXPECT_EQ(adv_score(s, 3, 5), 2);
    s.strategy = Strategy::adv_mult_locl_info;
    s.z_target = 8;
    EXPECT_EQ(adv_score(s, 1, 8), 0);
    EXPECT_EQ(adv_score(s, 3, 5), 5);
}

TEST(AdvSelection, MinimumScoreAlwaysSelected) {
    // Node 0: one negative neighbor (1) and 8 neutral neighbors (2..9).
    std::vector<std::pair<NodeId, NodeId>> e;
    for (NodeId j = 1; j < 10; ++j) e.emplace_back(0, j);
    for (NodeId j = 10; j < 20; ++j) e.emplace_back(j - 8, j);
    const Graph g(20, e);
    OpinionParams params;
    OpinionProcess proc(g, params);
    proc.set_opinion(1, Opinion::negative);
    proc.set_opinion(10, Opinion::negative);
    proc.set_opinion(11, Opinion::negative);
    auto s = spec_of(Strategy::adv_mult_locl_info, 1, 0.001);
    s.zeta = 1;
    s.z_target = 8;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        EXPECT_EQ(select_dynamic(s, proc, rng).members, std::vector<NodeId>{0});
    }
}

// Random 20-node graphs with random opinion snapshots, compared against the
// exhaustive scoring oracle for both Adv* strategies and both pools.
TEST(AdvSelection, MatchesExhaustiveOracle) {
    Rng rng(77);
    int snapshots = 0;
    while (snapshots < 50) {
        const Graph g = fixtures::gnp_graph(20, 0.15 + 0.3 * rng.uniform(), rng);
        OpinionParams params;
        OpinionProcess proc(g, params);
        for (NodeId i = 0; i < 20; ++i) {
            const double u = rng.uniform();
            if (u < 0.3) proc.set_opinion(i, Opinion::negative);
            else if (u < 0.45) proc.set_opinion(i, Opinion::positive);
        }
        std::vector<Opinion> ops;
        for (const auto& a : proc.agents()) ops.push_back(a.state);
        auto s = spec_of(rng.bernoulli(0.5) ? Strategy::adv_mult_locl_info : Strategy::adv_locl_info,
                         1 + rng.uniform_index(8), 0.001);
        s.zeta = static_cast<int>(rng.uniform_index(4));
        s.z_target = static_cast<int>(rng.uniform_index(6));
        s.adv_pool = rng.bernoulli(0.25) ? AdvPool::all_neutral : AdvPool::frontier;
        const auto ex = oracle::expected_adv_selection(s, g, ops);
        for (int draw = 0; draw < 20; ++draw) {
            const auto sel = select_dynamic(s, proc, rng);
            ASSERT_TRUE(oracle::matches(ex, sel.members)) << "snapshot " << snapshots;
            for (NodeId m : sel.members) ASSERT_EQ(ops[m], Opinion::neutral);
        }
        ++snapshots;
    }
}

TEST(DynamicSelection, FewerNeutralsThanTargetTakesAll) {
    const Graph g = fixtures::path_graph(6);
    OpinionParams params;
    OpinionProcess proc(g, params);
    for (NodeId i : {0u, 2u, 3u, 5u}) proc.set_opinion(i, Opinion::negative);
    for (Strategy st : {Strategy::dyn_rand, Strategy::locl_info, Strategy::adv_locl_info, Strategy::adv_mult_locl_info}) {
        Rng rng(1);
        EXPECT_EQ(select_dynamic(spec_of(st, 3, 0.1), proc, rng).members, (std::vector<NodeId>{1, 4}));
    }
    for (NodeId i : {1u, 4u}) proc.set_opinion(i, Opinion::positive);
    Rng rng(1);
    EXPECT_TRUE(select_dynamic(spec_of(Strategy::locl_info, 3, 0.1), proc, rng).members.empty());
}

TEST(DynamicSelection, LocalInfoPrefersFrontierThenFills) {
    const Graph g = fixtures::path_graph(10);
    OpinionParams params;
    OpinionProcess proc(g, params);
    proc.set_opinion(0, Opinion::negative);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        const auto ts = select_dynamic(spec_of(Strategy::locl_info, 3, 0.1), proc, rng);
        ASSERT_EQ(ts.size(), 3u);
        EXPECT_TRUE(ts.contains(1));
        EXPECT_FALSE(ts.contains(0));
    }
}

namespace {

struct Recorder {
    std::vector<std::vector<NodeId>> sets;
    std::vector<std::vector<Opinion>> states;
};

Recorder record(Strategy st, std::size_t tr, const Graph& g, const CentralityScores* cent) {
    OpinionParams params;
    params.mu_neg = 0.01;
    params.omega_neg = params.omega_pos = 0.05;
    params.tau = 120;
    auto s = spec_of(st, 20, 0.002);
    s.update_interval = tr;
    Campaign c(s, g, cent, Rng(4));
    Rng rng(5);
    Recorder rec;
    auto obs = [&](std::size_t, const OpinionProcess& p) {
        rec.sets.push_back(c.targets().members);
        std::vector<Opinion> st_now;
        for (const auto& a : p.agents()) st_now.push_back(a.state);
        rec.states.push_back(st_now);
    };
    run_opinion_stage(g, params, c, rng, obs);
    return rec;
}

}  // namespace

TEST(CampaignController, StaticSetsNeverChange) {
    Rng grng(9);
    const Graph g = generate_watts_strogatz(300, 6, 0.05, grng);
    const auto cent = betweenness(g);
    for (Strategy st : {Strategy::targt_rand, Strategy::cntrl}) {
        const auto rec = record(st, 1, g, &cent);
        ASSERT_EQ(rec.sets.size(), 120u);
        for (const auto& s : rec.sets) EXPECT_EQ(s, rec.sets.front());
        EXPECT_EQ(rec.sets.front().size(), 20u);
    }
}

TEST(CampaignController, DynamicSetsChangeOnlyOnSchedule) {
    Rng grng(9);
    const Graph g = generate_watts_strogatz(300, 6, 0.05, grng);
    for (Strategy st : {Strategy::dyn_rand, Strategy::locl_info, Strategy::adv_locl_info, Strategy::adv_mult_locl_info}) {
        for (std::size_t tr : {1u, 7u, 20u}) {
            const auto rec = record(st, tr, g, nullptr);
            std::size_t last_refresh = 0;
            for (std::size_t t = 0; t < rec.sets.size(); ++t) {
                if (t % tr == 0) {
                    last_refresh = t;
                    for (NodeId m : rec.sets[t]) EXPECT_EQ(rec.states[t][m], Opinion::neutral);
                } else {
                    EXPECT_EQ(rec.sets[t], rec.sets[t - 1]) << strategy_name(st) << " t=" << t;
                }
                for (NodeId m : rec.sets[t]) EXPECT_EQ(rec.states[last_refresh][m], Opinion::neutral);
            }
        }
    }
}

TEST(CampaignSpec, Validation) {
    auto s = spec_of(Strategy::targt_rand, 0, 0.001);
    EXPECT_THROW(s.validate(100), ConfigError);
    s.target_size = 101;
    EXPECT_THROW(s.validate(100), ConfigError);
    s = spec_of(Strategy::dyn_rand, 10, 0.001);
    s.update_interval = 0;
    EXPECT_THROW(s.validate(100), ConfigError);
    s = spec_of(Strategy::unif_rand, 0, 1.5);
    EXPECT_THROW(s.validate(100), ConfigError);
}

TEST(Strategy, NamesRoundTrip) {
    for (Strategy s : kAllStrategies) EXPECT_EQ(parse_strategy(strategy_name(s)), s);
    EXPECT_THROW(parse_strategy("bogus"), ConfigError);
}

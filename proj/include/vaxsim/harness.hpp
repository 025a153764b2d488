#pragma once

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "vaxsim/betweenness.hpp"
#include "vaxsim/campaigns.hpp"
#include "vaxsim/epidemic.hpp"
#include "vaxsim/graph.hpp"
#include "vaxsim/opinion.hpp"
#include "vaxsim/rng.hpp"
#include "vaxsim/stats.hpp"

namespace vaxsim {

/// One fully specified model configuration (a single grid point).
struct ParamPoint {
    std::size_t n = 5000;
    std::size_t k = 10;
    double p = 0.01;
    OpinionParams opinion;
    CampaignSpec campaign;
    EpidemicParams epidemic;
};

struct SweepAxes {
    std::vector<Strategy> strategy;
    std::vector<std::optional<std::size_t>> tau;
    std::vector<double> omega;  ///< sets omega_neg = omega_pos
    std::vector<double> mu_pos;
    std::vector<std::size_t> target_size;
    std::vector<std::size_t> update_interval;
    std::vector<int> zeta;
    std::vector<int> z_target;
};

struct ExperimentConfig {
    ParamPoint base;
    SweepAxes sweep;
    std::size_t networks = 50;
    std::size_t sir_runs = 100;
    std::uint64_t master_seed = 1;
    std::string output;

    /// Replaces the replication counts with 500 networks x 500 SIR runs.
    void use_full_scale() {
        networks = 500;
        sir_runs = 500;
    }
};

struct AggregateResult {
    ParamPoint point;
    std::size_t n_runs = 0;
    double mean_sr = 0.0;
    double ci95_sr = 0.0;
    double mean_anti = 0.0;
    double mean_pro = 0.0;
    double noseed_frac = 0.0;
    std::size_t clamp_count = 0;
    std::size_t flagged_runs = 0;
    /// 1.96 * sd / sqrt(#networks) over per-network mean epidemic sizes.
    double ci95_netmean = 0.0;
};

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

inline std::optional<std::size_t> parse_tau(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return std::nullopt;
        throw ConfigError("tau must be a positive integer or \"inf\"");
    }
    if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError("tau must be a positive integer or \"inf\"");
    return static_cast<std::size_t>(v.get<long long>());
}

inline json tau_to_json(const std::optional<std::size_t>& tau) {
    return tau ? json(*tau) : json("inf");
}

template <class T>
std::vector<T> get_list(const json& obj, const char* key) {
    if (!obj.contains(key)) return {};
    const auto& v = obj.at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(std::string("sweep axis '") + key + "' must be a non-empty list");
    try {
        return v.get<std::vector<T>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad sweep axis '") + key + "': " + e.what());
    }
}

}  // namespace detail

/// Reads an experiment from its JSON form. Every model symbol has its own key;
/// unknown keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    using detail::get_or;
    using nlohmann::json;
    ExperimentConfig cfg;
    detail::reject_unknown(j, {"network", "opinion", "campaign", "epidemic", "sweep", "replication", "seed", "output"},
                           "config");
    auto& b = cfg.base;

    const json net = j.value("network", json::object());
    detail::reject_unknown(net, {"N", "k", "p"}, "network");
    b.n = get_or<std::size_t>(net, "N", b.n);
    b.k = get_or<std::size_t>(net, "k", b.k);
    b.p = get_or<double>(net, "p", b.p);

    const json op = j.value("opinion", json::object());
    detail::reject_unknown(op, {"mu_neg", "omega", "omega_neg", "omega_pos", "theta", "tau"}, "opinion");
    b.opinion.mu_neg = get_or<double>(op, "mu_neg", b.opinion.mu_neg);
    const double omega = get_or<double>(op, "omega", 0.0);
    b.opinion.omega_neg = get_or<double>(op, "omega_neg", omega);
    b.opinion.omega_pos = get_or<double>(op, "omega_pos", omega);
    b.opinion.theta = get_or<int>(op, "theta", b.opinion.theta);
    if (op.contains("tau")) b.opinion.tau = detail::parse_tau(op.at("tau"));

    const json cp = j.value("campaign", json::object());
    detail::reject_unknown(cp, {"strategy", "mu_pos", "T", "t_r", "zeta", "Z", "adv_pool"}, "campaign");
    b.campaign.strategy = parse_strategy(get_or<std::string>(cp, "strategy", "none"));
    b.campaign.mu_pos = get_or<double>(cp, "mu_pos", b.campaign.mu_pos);
    b.campaign.target_size = get_or<std::size_t>(cp, "T", b.campaign.target_size);
    b.campaign.update_interval = get_or<std::size_t>(cp, "t_r", b.campaign.update_interval);
    b.campaign.zeta = get_or<int>(cp, "zeta", b.campaign.zeta);
    b.campaign.z_target = get_or<int>(cp, "Z", b.campaign.z_target);
    b.campaign.adv_pool = parse_adv_pool(get_or<std::string>(cp, "adv_pool", "frontier"));

    const json ep = j.value("epidemic", json::object());
    detail::reject_unknown(ep, {"beta", "gamma", "I0"}, "epidemic");
    b.epidemic.beta = get_or<double>(ep, "beta", b.epidemic.beta);
    b.epidemic.gamma = get_or<double>(ep, "gamma", b.epidemic.gamma);
    b.epidemic.initial_infected = get_or<std::size_t>(ep, "I0", b.epidemic.initial_infected);

    const json sw = j.value("sweep", json::object());
    detail::reject_unknown(sw, {"strategy", "tau", "omega", "mu_pos", "T", "t_r", "zeta", "Z"}, "sweep");
    for (const auto& name : detail::get_list<std::string>(sw, "strategy")) cfg.sweep.strategy.push_back(parse_strategy(name));
    if (sw.contains("tau")) {
        if (!sw.at("tau").is_array() || sw.at("tau").empty()) throw ConfigError("sweep axis 'tau' must be a non-empty list");
        for (const auto& v : sw.at("tau")) cfg.sweep.tau.push_back(detail::parse_tau(v));
    }
    cfg.sweep.omega = detail::get_list<double>(sw, "omega");
    cfg.sweep.mu_pos = detail::get_list<double>(sw, "mu_pos");
    cfg.sweep.target_size = detail::get_list<std::size_t>(sw, "T");
    cfg.sweep.update_interval = detail::get_list<std::size_t>(sw, "t_r");
    cfg.sweep.zeta = detail::get_list<int>(sw, "zeta");
    cfg.sweep.z_target = detail::get_list<int>(sw, "Z");

    const json rep = j.value("replication", json::object());
    detail::reject_unknown(rep, {"networks", "sir_runs", "full_scale"}, "replication");
    cfg.networks = get_or<std::size_t>(rep, "networks", cfg.networks);
    cfg.sir_runs = get_or<std::size_t>(rep, "sir_runs", cfg.sir_runs);
    if (get_or<bool>(rep, "full_scale", false)) cfg.use_full_scale();

    cfg.master_seed = get_or<std::uint64_t>(j, "seed", cfg.master_seed);
    cfg.output = get_or<std::string>(j, "output", "");
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    using nlohmann::json;
    const auto& b = cfg.base;
    json j;
    j["network"] = {{"N", b.n}, {"k", b.k}, {"p", b.p}};
    j["opinion"] = {{"mu_neg", b.opinion.mu_neg},
                    {"omega_neg", b.opinion.omega_neg},
                    {"omega_pos", b.opinion.omega_pos},
                    {"theta", b.opinion.theta},
                    {"tau", detail::tau_to_json(b.opinion.tau)}};
    j["campaign"] = {{"strategy", std::string(strategy_name(b.campaign.strategy))},
                     {"mu_pos", b.campaign.mu_pos},
                     {"T", b.campaign.target_size},
                     {"t_r", b.campaign.update_interval},
                     {"zeta", b.campaign.zeta},
                     {"Z", b.campaign.z_target},
                     {"adv_pool", std::string(adv_pool_name(b.campaign.adv_pool))}};
    j["epidemic"] = {{"beta", b.epidemic.beta}, {"gamma", b.epidemic.gamma}, {"I0", b.epidemic.initial_infected}};
    json sw = json::object();
    if (!cfg.sweep.strategy.empty()) {
        json a = json::array();
        for (auto s : cfg.sweep.strategy) a.push_back(std::string(strategy_name(s)));
        sw["strategy"] = a;
    }
    if (!cfg.sweep.tau.empty()) {
        json a = json::array();
        for (const auto& t : cfg.sweep.tau) a.push_back(detail::tau_to_json(t));
        sw["tau"] = a;
    }
    if (!cfg.sweep.omega.empty()) sw["omega"] = cfg.sweep.omega;
    if (!cfg.sweep.mu_pos.empty()) sw["mu_pos"] = cfg.sweep.mu_pos;
    if (!cfg.sweep.target_size.empty()) sw["T"] = cfg.sweep.target_size;
    if (!cfg.sweep.update_interval.empty()) sw["t_r"] = cfg.sweep.update_interval;
    if (!cfg.sweep.zeta.empty()) sw["zeta"] = cfg.sweep.zeta;
    if (!cfg.sweep.z_target.empty()) sw["Z"] = cfg.sweep.z_target;
    j["sweep"] = sw;
    j["replication"] = {{"networks", cfg.networks}, {"sir_runs", cfg.sir_runs}};
    j["seed"] = cfg.master_seed;
    j["output"] = cfg.output;
    return j;
}

// ---------------------------------------------------------------------------
// Grid

/// Cartesian product of the sweep axes over the base point. Axis order, from
/// slowest to fastest varying: strategy, tau, omega, mu_pos, T, t_r, zeta, Z.
inline std::vector<ParamPoint> expand_grid(const ExperimentConfig& cfg) {
    const auto& b = cfg.base;
    const auto& s = cfg.sweep;
    auto or_base = []<class T>(const std::vector<T>& axis, T base) { return axis.empty() ? std::vector<T>{base} : axis; };
    const auto strategies = or_base(s.strategy, b.campaign.strategy);
    const auto taus = or_base(s.tau, b.opinion.tau);
    const auto omegas = s.omega.empty() ? std::vector<std::optional<double>>{std::nullopt}
                                        : std::vector<std::optional<double>>(s.omega.begin(), s.omega.end());
    const auto mus = or_base(s.mu_pos, b.campaign.mu_pos);
    const auto ts = or_base(s.target_size, b.campaign.target_size);
    const auto trs = or_base(s.update_interval, b.campaign.update_interval);
    const auto zetas = or_base(s.zeta, b.campaign.zeta);
    const auto zs = or_base(s.z_target, b.campaign.z_target);

    std::vector<ParamPoint> grid;
    for (auto st : strategies)
        for (const auto& tau : taus)
            for (const auto& om : omegas)
                for (double mu : mus)
                    for (auto t : ts)
                        for (auto tr : trs)
                            for (int ze : zetas)
                                for (int z : zs) {
                                    ParamPoint pt = b;
                                    pt.campaign.strategy = st;
                                    pt.opinion.tau = tau;
                                    if (om) pt.opinion.omega_neg = pt.opinion.omega_pos = *om;
                                    pt.campaign.mu_pos = mu;
                                    pt.campaign.target_size = t;
                                    pt.campaign.update_interval = tr;
                                    pt.campaign.zeta = ze;
                                    pt.campaign.z_target = z;
                                    grid.push_back(pt);
                                }
    return grid;
}

inline void validate(const ExperimentConfig& cfg) {
    if (cfg.networks < 1 || cfg.sir_runs < 1) throw ConfigError("replication counts must be >= 1");
    if (cfg.base.n < 1) throw ConfigError("N must be positive");
    if (cfg.base.k == 0 || cfg.base.k % 2 != 0 || cfg.base.k >= cfg.base.n) {
        throw ConfigError("k must be even, positive and below N");
    }
    if (!(cfg.base.p >= 0.0 && cfg.base.p <= 1.0)) throw ConfigError("p must lie in [0,1]");
    for (const auto& pt : expand_grid(cfg)) {
        pt.opinion.validate();
        pt.campaign.validate(pt.n);
        pt.epidemic.validate();
    }
}

// ---------------------------------------------------------------------------
// Replicates

/// Everything one replicate network contributes to one grid point.
struct NetworkResult {
    std::vector<std::uint32_t> sizes;  ///< epidemic size per SIR run, by sir index
    std::size_t anti = 0;
    std::size_t pro = 0;
    std::size_t no_seed_runs = 0;
    std::size_t clamp_events = 0;
    bool flagged = false;
};

/// Replicate-level handles shared by all grid points on one network.
struct Replicate {
    Graph graph;
    std::optional<CentralityScores> centrality;
};

inline Replicate make_replicate(const ParamPoint& pt, std::uint64_t master, std::size_t network_index, bool need_centrality) {
    Replicate r;
    Rng graph_rng = seed_schedule(master, network_index, StreamDomain::graph);
    r.graph = generate_watts_strogatz(pt.n, pt.k, pt.p, graph_rng);
    if (need_centrality) r.centrality = betweenness(r.graph);
    return r;
}

/// Opinion stage followed by `sir_runs` SIR runs on one replicate network.
inline NetworkResult run_replicate(const Replicate& rep, const ParamPoint& pt, std::uint64_t master,
                                   std::size_t network_index, std::size_t sir_runs) {
    NetworkResult res;
    Campaign campaign(pt.campaign, rep.graph, rep.centrality ? &*rep.centrality : nullptr,
                      seed_schedule(master, network_index, StreamDomain::campaign));
    Rng opinion_rng = seed_schedule(master, network_index, StreamDomain::opinion);
    const OpinionTrace trace = run_opinion_stage(rep.graph, pt.opinion, campaign, opinion_rng);
    res.clamp_events = campaign.clamp_events();
    if (trace.cap_hit) {
        res.flagged = true;
        return res;
    }
    const auto& last = trace.counts.back();
    res.anti = last.negative;
    res.pro = last.positive;
    const auto disease = vaccinate(trace.final_states);
    res.sizes.reserve(sir_runs);
    for (std::size_t s = 0; s < sir_runs; ++s) {
        Rng sir_rng = seed_schedule(master, network_index, static_cast<std::uint64_t>(s));
        const RunOutcome out = run_sir(rep.graph, disease, pt.epidemic, sir_rng);
        res.sizes.push_back(static_cast<std::uint32_t>(out.epidemic_size));
        res.no_seed_runs += out.no_seed ? 1 : 0;
    }
    return res;
}

/// Pools run outcomes into one row. Runs with cap_hit are excluded from the
/// statistics and counted in flagged_runs; no-seed runs count as size 0.
inline AggregateResult aggregate(std::span<const RunOutcome> outcomes) {
    AggregateResult r;
    std::vector<double> sizes;
    double anti = 0.0;
    double pro = 0.0;
    std::size_t noseed = 0;
    for (const auto& o : outcomes) {
        if (o.cap_hit) {
            ++r.flagged_runs;
            continue;
        }
        sizes.push_back(static_cast<double>(o.epidemic_size));
        anti += static_cast<double>(o.anti_vaccine_count);
        pro += static_cast<double>(o.pro_vaccine_count);
        noseed += o.no_seed ? 1 : 0;
    }
    const Summary s = summarize(sizes);
    r.n_runs = s.n;
    r.mean_sr = s.mean;
    r.ci95_sr = s.ci95;
    if (s.n > 0) {
        r.mean_anti = anti / static_cast<double>(s.n);
        r.mean_pro = pro / static_cast<double>(s.n);
        r.noseed_frac = static_cast<double>(noseed) / static_cast<double>(s.n);
    }
    return r;
}

inline AggregateResult aggregate_point(const ParamPoint& pt, std::span<const NetworkResult> nets, std::size_t sir_runs) {
    std::vector<RunOutcome> outcomes;
    std::vector<double> net_means;
    std::size_t clamps = 0;
    for (const auto& nr : nets) {
        clamps += nr.clamp_events;
        if (nr.flagged) {
            RunOutcome flagged;
            flagged.cap_hit = true;
            outcomes.insert(outcomes.end(), sir_runs, flagged);
            continue;
        }
        double sum = 0.0;
        // Per-run no-seed status is uniform within a network (same opinion outcome).
        const bool no_seed = nr.anti == 0;
        for (auto s : nr.sizes) {
            RunOutcome o;
            o.epidemic_size = s;
            o.anti_vaccine_count = nr.anti;
            o.pro_vaccine_count = nr.pro;
            o.no_seed = no_seed;
            outcomes.push_back(o);
            sum += s;
        }
        net_means.push_back(sum / static_cast<double>(nr.sizes.size()));
    }
    AggregateResult r = aggregate(outcomes);
    r.point = pt;
    r.clamp_count = clamps;
    r.ci95_netmean = summarize(net_means).ci95;
    return r;
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every grid point on every replicate network.
///
/// Work is split by network index across `threads` workers; each network's
/// graph (and betweenness, if any point needs it) is built once and reused by
/// all grid points. Streams depend only on (seed, network, stage, sir index),
/// and pooling follows network order, so results do not depend on the worker
/// count.
inline std::vector<AggregateResult> run_experiment(const ExperimentConfig& cfg, unsigned threads = 1,
                                                   const ProgressFn& progress = {}) {
    validate(cfg);
    const auto grid = expand_grid(cfg);
    bool need_centrality = false;
    for (const auto& pt : grid) need_centrality = need_centrality || pt.campaign.strategy == Strategy::cntrl;

    // results[point][network]
    std::vector<std::vector<NetworkResult>> results(grid.size(), std::vector<NetworkResult>(cfg.networks));
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex err_mu;
    std::exception_ptr err;

    auto worker = [&] {
        for (;;) {
            const std::size_t net = next.fetch_add(1);
            if (net >= cfg.networks) return;
            try {
                const Replicate rep = make_replicate(cfg.base, cfg.master_seed, net, need_centrality);
                for (std::size_t g = 0; g < grid.size(); ++g) {
                    results[g][net] = run_replicate(rep, grid[g], cfg.master_seed, net, cfg.sir_runs);
                }
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (!err) err = std::current_exception();
                next.store(cfg.networks);
                return;
            }
            const std::size_t d = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(err_mu);
                progress(d, cfg.networks);
            }
        }
    };

    threads = std::max(1u, threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (err) std::rethrow_exception(err);

    std::vector<AggregateResult> out;
    out.reserve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) out.push_back(aggregate_point(grid[g], results[g], cfg.sir_runs));
    return out;
}

// ---------------------------------------------------------------------------
// Output

inline constexpr const char* kCsvHeader =
    "strategy,N,k,p,theta,tau,mu_neg,mu_pos,omega_neg,omega_pos,T,t_r,zeta,Z,beta,gamma,I0,"
    "n_runs,mean_Sr,ci95_Sr,mean_anti,mean_pro,noseed_frac,clamp_count,flagged_runs,ci95_netmean";

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace detail

/// One row per grid point. Parameters a strategy does not use are left empty.
inline void write_csv(std::ostream& out, std::span<const AggregateResult> rows) {
    using detail::fmt_double;
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        const auto& pt = r.point;
        const auto s = pt.campaign.strategy;
        out << strategy_name(s) << ',' << pt.n << ',' << pt.k << ',' << fmt_double(pt.p) << ',' << pt.opinion.theta << ','
            << (pt.opinion.tau ? std::to_string(*pt.opinion.tau) : "inf") << ',' << fmt_double(pt.opinion.mu_neg) << ','
            << (s == Strategy::none ? "" : fmt_double(pt.campaign.mu_pos)) << ',' << fmt_double(pt.opinion.omega_neg)
            << ',' << fmt_double(pt.opinion.omega_pos) << ','
            << (is_targeted(s) ? std::to_string(pt.campaign.target_size) : "") << ','
            << (is_dynamic(s) ? std::to_string(pt.campaign.update_interval) : "") << ','
            << (uses_zeta(s) ? std::to_string(pt.campaign.zeta) : "") << ','
            << (s == Strategy::adv_mult_locl_info ? std::to_string(pt.campaign.z_target) : "") << ','
            << fmt_double(pt.epidemic.beta) << ',' << fmt_double(pt.epidemic.gamma) << ','
            << pt.epidemic.initial_infected << ',' << r.n_runs << ',' << fmt_double(r.mean_sr) << ','
            << fmt_double(r.ci95_sr) << ',' << fmt_double(r.mean_anti) << ',' << fmt_double(r.mean_pro) << ','
            << fmt_double(r.noseed_frac) << ',' << r.clamp_count << ',' << r.flagged_runs << ','
            << fmt_double(r.ci95_netmean) << '\n';
    }
}

#ifndef VAXSIM_GIT_COMMIT
#define VAXSIM_GIT_COMMIT "unknown"
#endif

inline nlohmann::json metadata_json(const ExperimentConfig& cfg, unsigned threads, double wall_seconds) {
    return {{"config", config_to_json(cfg)},
            {"seed", cfg.master_seed},
            {"rng_version", kRngVersion},
            {"threads", threads},
            {"wall_clock_seconds", wall_seconds},
            {"commit", VAXSIM_GIT_COMMIT}};
}

}  // namespace vaxsim

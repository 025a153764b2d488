// vaxsim: opinion-then-epidemic Monte Carlo driver.
//
//   vaxsim run    --config exp.json [--seed S] [--threads N] [--out results.csv] [--full-scale]
//   vaxsim sweep  --strategy cntrl --omega 1e-4,1e-3,1e-2 --mu-pos 0.001 ... [--out results.csv]
//   vaxsim trace  (--config exp.json | sweep flags) [--network-index i] --out trace.csv
//   vaxsim oracle [--seed S] [--graphs 200] [--sir-runs 1000000]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vaxsim/oracle.hpp"
#include "vaxsim/vaxsim.hpp"

namespace {

using namespace vaxsim;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string out;
    bool full_scale = false;
};

/// Grid shorthand: every model symbol as a flag, list-valued for sweep axes.
struct GridFlags {
    std::vector<std::string> strategy;
    std::vector<std::string> tau;
    std::vector<double> omega;
    std::vector<double> mu_pos;
    std::vector<std::size_t> target_size;
    std::vector<std::size_t> update_interval;
    std::vector<int> zeta;
    std::vector<int> z_target;
    std::optional<std::size_t> n, k;
    std::optional<double> p, mu_neg, beta, gamma;
    std::optional<int> theta;
    std::optional<std::size_t> i0, networks, sir_runs;
    std::optional<std::string> adv_pool;
};

void add_common(CLI::App* app, CommonFlags& f, bool with_config) {
    if (with_config) app->add_option("--config", f.config, "experiment config (JSON)")->check(CLI::ExistingFile);
    app->add_option("--seed", f.seed, "master seed (overrides the config)");
    app->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--out", f.out, "output path (overrides the config)");
    app->add_flag("--full-scale", f.full_scale, "500 networks x 500 SIR runs");
}

void add_grid(CLI::App* app, GridFlags& g) {
    app->add_option("--strategy", g.strategy, "strategy name(s)")->delimiter(',');
    app->add_option("--tau", g.tau, "opinion step limit(s), or inf")->delimiter(',');
    app->add_option("--omega", g.omega, "social rate(s), omega- = omega+")->delimiter(',');
    app->add_option("--mu-pos", g.mu_pos, "positive general exposure rate(s)")->delimiter(',');
    app->add_option("--T", g.target_size, "target set size(s)")->delimiter(',');
    app->add_option("--tr", g.update_interval, "dynamic update interval(s)")->delimiter(',');
    app->add_option("--zeta", g.zeta, "target negative-neighbor count(s)")->delimiter(',');
    app->add_option("--Z", g.z_target, "target neutral-neighbor count(s)")->delimiter(',');
    app->add_option("--N", g.n, "population size");
    app->add_option("--k", g.k, "mean degree");
    app->add_option("--p", g.p, "rewiring probability");
    app->add_option("--mu-neg", g.mu_neg, "negative general exposure rate");
    app->add_option("--theta", g.theta, "opinion threshold");
    app->add_option("--beta", g.beta, "infection rate");
    app->add_option("--gamma", g.gamma, "recovery rate");
    app->add_option("--I0", g.i0, "initial infected");
    app->add_option("--networks", g.networks, "replicate networks");
    app->add_option("--sir-runs", g.sir_runs, "SIR runs per network");
    app->add_option("--adv-pool", g.adv_pool, "frontier or all-neutral");
}

std::optional<std::size_t> tau_from_string(const std::string& s) {
    if (s == "inf" || s == "infinity") return std::nullopt;
    return static_cast<std::size_t>(std::stoull(s));
}

/// Applies grid flags on top of a config. Single-valued lists set the base
/// point as well as the axis, so `trace` can use them too.
void apply_grid(ExperimentConfig& cfg, const GridFlags& g) {
    auto& b = cfg.base;
    if (g.n) b.n = *g.n;
    if (g.k) b.k = *g.k;
    if (g.p) b.p = *g.p;
    if (g.mu_neg) b.opinion.mu_neg = *g.mu_neg;
    if (g.theta) b.opinion.theta = *g.theta;
    if (g.beta) b.epidemic.beta = *g.beta;
    if (g.gamma) b.epidemic.gamma = *g.gamma;
    if (g.i0) b.epidemic.initial_infected = *g.i0;
    if (g.networks) cfg.networks = *g.networks;
    if (g.sir_runs) cfg.sir_runs = *g.sir_runs;
    if (g.adv_pool) b.campaign.adv_pool = parse_adv_pool(*g.adv_pool);
    if (!g.strategy.empty()) {
        cfg.sweep.strategy.clear();
        for (const auto& s : g.strategy) cfg.sweep.strategy.push_back(parse_strategy(s));
        b.campaign.strategy = cfg.sweep.strategy.front();
    }
    if (!g.tau.empty()) {
        cfg.sweep.tau.clear();
        for (const auto& s : g.tau) cfg.sweep.tau.push_back(tau_from_string(s));
        b.opinion.tau = cfg.sweep.tau.front();
    }
    if (!g.omega.empty()) {
        cfg.sweep.omega = g.omega;
        b.opinion.omega_neg = b.opinion.omega_pos = g.omega.front();
    }
    if (!g.mu_pos.empty()) {
        cfg.sweep.mu_pos = g.mu_pos;
        b.campaign.mu_pos = g.mu_pos.front();
    }
    if (!g.target_size.empty()) {
        cfg.sweep.target_size = g.target_size;
        b.campaign.target_size = g.target_size.front();
    }
    if (!g.update_interval.empty()) {
        cfg.sweep.update_interval = g.update_interval;
        b.campaign.update_interval = g.update_interval.front();
    }
    if (!g.zeta.empty()) {
        cfg.sweep.zeta = g.zeta;
        b.campaign.zeta = g.zeta.front();
    }
    if (!g.z_target.empty()) {
        cfg.sweep.z_target = g.z_target;
        b.campaign.z_target = g.z_target.front();
    }
}

void apply_common(ExperimentConfig& cfg, const CommonFlags& f) {
    if (f.seed) cfg.master_seed = *f.seed;
    if (!f.out.empty()) cfg.output = f.out;
    if (f.full_scale) cfg.use_full_scale();
}

int execute(ExperimentConfig cfg, unsigned threads) {
    validate(cfg);
    const bool to_stdout = cfg.output.empty() || cfg.output == "-";
    std::ofstream out;
    if (!to_stdout) {
        const auto parent = std::filesystem::path(cfg.output).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        out.open(cfg.output);
        if (!out) throw ConfigError("cannot write " + cfg.output);
    }
    const auto start = std::chrono::steady_clock::now();
    const auto results = run_experiment(cfg, threads, [](std::size_t done, std::size_t total) {
        std::fprintf(stderr, "\rnetworks %zu/%zu", done, total);
        if (done == total) std::fputc('\n', stderr);
    });
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (to_stdout) {
        write_csv(std::cout, results);
        return 0;
    }
    write_csv(out, results);
    std::ofstream meta(cfg.output + ".meta.json");
    meta << metadata_json(cfg, threads, wall).dump(2) << '\n';
    std::fprintf(stderr, "wrote %zu rows to %s (%.1f s)\n", results.size(), cfg.output.c_str(), wall);
    return 0;
}

struct TraceFlags {
    std::size_t network_index = 0;
    std::string graph_out;
    std::optional<std::size_t> snapshot_step;
    std::string targets_out;
};

/// Single replicate of the first grid point, with per-step opinion counts.
int trace(ExperimentConfig cfg, const TraceFlags& tf) {
    validate(cfg);
    const ParamPoint pt = expand_grid(cfg).front();
    const std::uint64_t seed = cfg.master_seed;
    const Replicate rep = make_replicate(pt, seed, tf.network_index, pt.campaign.strategy == Strategy::cntrl);
    if (!tf.graph_out.empty()) {
        std::ofstream g(tf.graph_out);
        write_edge_list(rep.graph, g);
    }

    Campaign campaign(pt.campaign, rep.graph, rep.centrality ? &*rep.centrality : nullptr,
                      seed_schedule(seed, tf.network_index, StreamDomain::campaign));
    Rng rng = seed_schedule(seed, tf.network_index, StreamDomain::opinion);

    // Neighborhood make-up of the target set at one step: (n-, n0) -> count.
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> hist;
    std::function<void(std::size_t, const OpinionProcess&)> observer;
    if (tf.snapshot_step) {
        observer = [&](std::size_t step, const OpinionProcess& proc) {
            if (step != *tf.snapshot_step) return;
            for (NodeId m : campaign.targets().members) {
                ++hist[{proc.negative_neighbors(m), proc.neutral_neighbors(m)}];
            }
        };
    }
    const OpinionTrace tr = run_opinion_stage(rep.graph, pt.opinion, campaign, rng, observer);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!cfg.output.empty() && cfg.output != "-") {
        file.open(cfg.output);
        if (!file) throw ConfigError("cannot write " + cfg.output);
        out = &file;
    }
    *out << "step,neutral,positive,negative\n";
    for (std::size_t t = 0; t < tr.counts.size(); ++t) {
        const auto& c = tr.counts[t];
        *out << t << ',' << c.neutral << ',' << c.positive << ',' << c.negative << '\n';
    }

    if (!tf.targets_out.empty()) {
        std::ofstream h(tf.targets_out);
        h << "n_neg,n_neutral,count\n";
        for (const auto& [key, count] : hist) h << key.first << ',' << key.second << ',' << count << '\n';
    }

    const auto disease = vaccinate(tr.final_states);
    std::vector<double> sizes;
    for (std::size_t s = 0; s < cfg.sir_runs; ++s) {
        Rng sir_rng = seed_schedule(seed, tf.network_index, static_cast<std::uint64_t>(s));
        sizes.push_back(static_cast<double>(run_sir(rep.graph, disease, pt.epidemic, sir_rng).epidemic_size));
    }
    const Summary sum = summarize(sizes);
    const auto& last = tr.counts.back();
    std::fprintf(stderr, "strategy=%s steps=%zu cap_hit=%d neutral=%zu positive=%zu negative=%zu mean_Sr=%.3f ci95=%.3f (%zu runs)\n",
                 std::string(strategy_name(pt.campaign.strategy)).c_str(), tr.steps, tr.cap_hit ? 1 : 0, last.neutral,
                 last.positive, last.negative, sum.mean, sum.ci95, sum.n);
    return 0;
}

struct OracleFlags {
    std::uint64_t seed = 7;
    std::size_t graphs = 200;
    std::size_t sir_runs = 1000000;
};

/// Cross-checks production algorithms against the brute-force references.
int oracle_checks(const OracleFlags& of) {
    bool all_ok = true;
    auto report = [&](const char* name, bool ok, const std::string& detail) {
        std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
        all_ok = all_ok && ok;
    };

    {
        Rng rng(derive_key(of.seed, {1}));
        double worst = 0.0;
        for (std::size_t gi = 0; gi < of.graphs; ++gi) {
            const std::size_t n = 2 + rng.uniform_index(49);
            const double dens = 0.05 + 0.25 * rng.uniform();
            std::vector<std::pair<NodeId, NodeId>> edges;
            for (NodeId u = 0; u < n; ++u)
                for (NodeId v = u + 1; v < n; ++v)
                    if (rng.bernoulli(dens)) edges.emplace_back(u, v);
            const Graph g(n, edges);
            const auto fast = betweenness(g).scores;
            const auto slow = oracle::brute_force_betweenness(g);
            for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(fast[i] - slow[i]));
        }
        report("betweenness", worst <= 1e-9, std::to_string(of.graphs) + " graphs, max abs diff " + std::to_string(worst));
    }

    {
        // 4-node path, everyone unvaccinated, seed fixed at an end node.
        const std::vector<std::pair<NodeId, NodeId>> path{{0, 1}, {1, 2}, {2, 3}};
        const Graph g(4, path);
        const EpidemicParams ep{0.1, 0.1, 1};
        std::vector<DiseaseState> init(4, DiseaseState::susceptible);
        init[0] = DiseaseState::infected;
        const double exact = oracle::SirChain(g, ep.beta, ep.gamma).expected_final_size(init);
        std::vector<double> sizes;
        sizes.reserve(of.sir_runs);
        Rng rng(derive_key(of.seed, {2}));
        for (std::size_t r = 0; r < of.sir_runs; ++r) {
            sizes.push_back(static_cast<double>(run_sir(g, init, ep, rng).epidemic_size));
        }
        const Summary s = summarize(sizes);
        const double se = s.sd / std::sqrt(static_cast<double>(s.n));
        const double z = std::abs(s.mean - exact) / se;
        char buf[160];
        std::snprintf(buf, sizeof buf, "4-node path, %zu runs, mean %.5f vs exact %.5f (|z| = %.2f)", s.n, s.mean, exact, z);
        report("sir-chain", z <= 3.0, buf);
    }

    {
        Rng rng(derive_key(of.seed, {3}));
        std::size_t ok = 0;
        const std::size_t cases = 50;
        for (std::size_t c = 0; c < cases; ++c) {
            std::vector<std::pair<NodeId, NodeId>> edges;
            for (NodeId u = 0; u < 20; ++u)
                for (NodeId v = u + 1; v < 20; ++v)
                    if (rng.bernoulli(0.25)) edges.emplace_back(u, v);
            const Graph g(20, edges);
            OpinionParams params;
            OpinionProcess proc(g, params);
            for (NodeId i = 0; i < 20; ++i) {
                const double u = rng.uniform();
                if (u < 0.3) proc.set_opinion(i, Opinion::negative);
                else if (u < 0.4) proc.set_opinion(i, Opinion::positive);
            }
            CampaignSpec spec;
            spec.strategy = c % 2 ? Strategy::adv_mult_locl_info : Strategy::adv_locl_info;
            spec.target_size = 1 + rng.uniform_index(8);
            spec.zeta = static_cast<int>(rng.uniform_index(4));
            spec.z_target = static_cast<int>(rng.uniform_index(8));
            spec.mu_pos = 0.001;
            std::vector<Opinion> ops;
            for (const auto& a : proc.agents()) ops.push_back(a.state);
            const auto ts = select_dynamic(spec, proc, rng);
            ok += oracle::matches(oracle::expected_adv_selection(spec, g, ops), ts.members) ? 1 : 0;
        }
        report("adv-selection", ok == cases, std::to_string(ok) + "/" + std::to_string(cases) + " snapshots match");
    }
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vaxsim: vaccine-opinion campaigns and SIR epidemics on small-world networks"};
    app.require_subcommand(1);

    CommonFlags run_f;
    auto* run = app.add_subcommand("run", "execute an experiment config");
    add_common(run, run_f, true);
    run->get_option("--config")->required();

    CommonFlags sweep_f;
    GridFlags sweep_g;
    auto* sweep = app.add_subcommand("sweep", "experiment from grid shorthand flags");
    add_common(sweep, sweep_f, true);
    add_grid(sweep, sweep_g);

    CommonFlags trace_f;
    GridFlags trace_g;
    TraceFlags trace_t;
    auto* tr = app.add_subcommand("trace", "single replicate with per-step opinion counts");
    add_common(tr, trace_f, true);
    add_grid(tr, trace_g);
    tr->add_option("--network-index", trace_t.network_index, "replicate network index");
    tr->add_option("--graph-out", trace_t.graph_out, "write the edge list here");
    tr->add_option("--snapshot-step", trace_t.snapshot_step, "record target neighborhoods at this step");
    tr->add_option("--targets-out", trace_t.targets_out, "CSV for the target neighborhood histogram");

    OracleFlags oracle_f;
    auto* orc = app.add_subcommand("oracle", "brute-force cross-checks");
    orc->add_option("--seed", oracle_f.seed, "seed");
    orc->add_option("--graphs", oracle_f.graphs, "random graphs for the betweenness check");
    orc->add_option("--sir-runs", oracle_f.sir_runs, "runs for the SIR check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            ExperimentConfig cfg = load_config(run_f.config);
            apply_common(cfg, run_f);
            return execute(cfg, run_f.threads);
        }
        if (*sweep) {
            ExperimentConfig cfg = sweep_f.config.empty() ? ExperimentConfig{} : load_config(sweep_f.config);
            apply_grid(cfg, sweep_g);
            apply_common(cfg, sweep_f);
            return execute(cfg, sweep_f.threads);
        }
        if (*tr) {
            ExperimentConfig cfg = trace_f.config.empty() ? ExperimentConfig{} : load_config(trace_f.config);
            apply_grid(cfg, trace_g);
            apply_common(cfg, trace_f);
            return trace(cfg, trace_t);
        }
        if (*orc) return oracle_checks(oracle_f);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vaxsim/campaigns.hpp"
#include "vaxsim/graph.hpp"
#include "vaxsim/opinion.hpp"
#include "vaxsim/rng.hpp"

namespace vaxsim {

enum class DiseaseState : std::uint8_t { susceptible, infected, recovered, vaccinated };

struct EpidemicParams {
    double beta = 0.1;
    double gamma = 0.1;
    std::size_t initial_infected = 1;

    void validate() const {
        if (!(beta >= 0.0 && beta <= 1.0) || !(gamma >= 0.0 && gamma <= 1.0)) {
            throw ConfigError("beta and gamma must lie in [0,1]");
        }
        // gamma = 0 would never absorb.
        if (gamma <= 0.0) throw ConfigError("gamma must be positive");
        if (initial_infected < 1) throw ConfigError("I0 must be >= 1");
    }
};

struct RunOutcome {
    std::size_t epidemic_size = 0;
    std::size_t vaccinated_count = 0;
    std::size_t anti_vaccine_count = 0;
    std::size_t pro_vaccine_count = 0;
    std::size_t sir_steps = 0;
    bool no_seed = false;
    bool cap_hit = false;
};

/// Optional record of infections: (step, node, infector). Seeds carry step 0
/// and no infector.
struct InfectionEvent {
    std::size_t step;
    NodeId node;
    std::int64_t infector;
};

/// Everyone not holding a negative opinion is vaccinated; refusers stay susceptible.
inline std::vector<DiseaseState> vaccinate(std::span<const Opinion> opinions) {
    std::vector<DiseaseState> out;
    out.reserve(opinions.size());
    for (Opinion o : opinions) {
        out.push_back(o == Opinion::negative ? DiseaseState::susceptible : DiseaseState::vaccinated);
    }
    return out;
}

/// Discrete-time SIR until no infected agent is left.
///
/// Seeds min(I0, #susceptible) uniform susceptible agents, unless `initial`
/// already holds infected agents, which then act as the seeds. Each step every
/// infected agent tries each susceptible neighbor with probability beta;
/// afterwards every agent infected before this step recovers with
/// probability gamma. The epidemic size is the number of recovered agents at
/// absorption.
inline RunOutcome run_sir(const Graph& g, std::span<const DiseaseState> initial, const EpidemicParams& params, Rng& rng,
                          std::vector<InfectionEvent>* log = nullptr) {
    params.validate();
    RunOutcome out;
    std::vector<DiseaseState> state(initial.begin(), initial.end());
    std::vector<NodeId> susceptible;
    std::vector<NodeId> infected;
    for (NodeId i = 0; i < state.size(); ++i) {
        if (state[i] == DiseaseState::susceptible) susceptible.push_back(i);
        else if (state[i] == DiseaseState::infected) infected.push_back(i);
        else if (state[i] == DiseaseState::vaccinated) ++out.vaccinated_count;
    }
    out.anti_vaccine_count = susceptible.size() + infected.size();
    if (infected.empty()) {
        if (susceptible.empty()) {
            out.no_seed = true;
            return out;
        }
        sample_distinct(susceptible, params.initial_infected, rng, infected);
    }
    for (NodeId s : infected) {
        state[s] = DiseaseState::infected;
        if (log) log->push_back({0, s, -1});
    }

    std::vector<NodeId> fresh;
    std::vector<NodeId> still;
    std::size_t recovered = 0;
    std::size_t step = 0;
    while (!infected.empty()) {
        ++step;
        fresh.clear();
        for (NodeId i : infected) {
            for (NodeId j : g.neighbors(i)) {
                if (state[j] != DiseaseState::susceptible) continue;
                if (rng.bernoulli(params.beta)) {
                    state[j] = DiseaseState::infected;
                    fresh.push_back(j);
                    if (log) log->push_back({step, j, static_cast<std::int64_t>(i)});
                }
            }
        }
        still.clear();
        for (NodeId i : infected) {
            if (rng.bernoulli(params.gamma)) {
                state[i] = DiseaseState::recovered;
                ++recovered;
            } else {
                still.push_back(i);
            }
        }
        infected.swap(still);
        infected.insert(infected.end(), fresh.begin(), fresh.end());
    }
    out.epidemic_size = recovered;
    out.sir_steps = step;
    return out;
}

}  // namespace vaxsim

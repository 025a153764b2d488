#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace vaxsim {

/// Bumped whenever the engine, the seeding scheme or any draw conversion
/// changes. Written into result metadata so old outputs stay interpretable.
inline constexpr const char* kRngVersion = "mt19937_64/splitmix-key/v1";

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Random stream used by every stochastic stage.
///
/// Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
/// converts raw words to doubles and bounded integers by hand, so draws are
/// identical across standard library implementations.
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t key) {
        std::seed_seq seq{static_cast<std::uint32_t>(key),
                          static_cast<std::uint32_t>(key >> 32)};
        engine_.seed(seq);
    }

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double uniform_pos() { return 1.0 - uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
    std::uint64_t uniform_index(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(engine_()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Number of failures before the first success of a Bernoulli(p) sequence.
    /// Requires 0 < p < 1.
    std::uint64_t geometric_skip(double log_q) {
        const double g = std::floor(std::log(uniform_pos()) / log_q);
        return g >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(g);
    }

  private:
    std::mt19937_64 engine_;
};

/// Derive a stream key from a master seed and a tuple of indices. The mixing
/// chain is injective per position, so distinct tuples give distinct keys
/// barring 64-bit collisions.
inline std::uint64_t derive_key(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = detail::splitmix64(master ^ 0x5bd1e9955bd1e995ULL);
    for (auto v : path) {
        h = detail::splitmix64(h ^ detail::splitmix64(v + 0x632be59bd9b4e019ULL));
    }
    return h;
}

/// Network-level stream domains. Their keys live above 2^40 in the second
/// path slot, disjoint from any SIR run index.
enum class StreamDomain : std::uint64_t { graph = 1, opinion = 2, campaign = 3 };

/// Stream for the network-level stages (graph, opinion, campaign) of one replicate.
inline Rng seed_schedule(std::uint64_t master, std::uint64_t network_index, StreamDomain domain) {
    return Rng(derive_key(master, {network_index, static_cast<std::uint64_t>(domain) + (1ULL << 40)}));
}

/// Stream for one SIR run on one replicate network.
inline Rng seed_schedule(std::uint64_t master, std::uint64_t network_index, std::uint64_t sir_index) {
    return Rng(derive_key(master, {network_index, sir_index}));
}

}  // namespace vaxsim

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace plato {

// Seeded, implementation-independent RNG. All randomness in the project flows
// through this engine so that runs are reproducible bit-for-bit: the standard
// library's distributions are not pinned across implementations, so the
// distributions below are hand-rolled.
//
// Engine: xoshiro256++ seeded via splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) {
            s = splitmix64(x);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // exp of a uniform draw on [log lo, log hi]; requires lo, hi > 0.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    // Inclusive on both ends.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(bounded(range));
    }

    // Box-Muller; draws two uniforms per normal.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform01();
        while (u1 <= 0.0) {
            u1 = uniform01();
        }
        const double u2 = uniform01();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + stddev * z;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    template <class T>
    const T& choice(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(bounded(v.size()))];
    }

private:
    // Unbiased bounded draw by rejection.
    std::uint64_t bounded(std::uint64_t n) {
        if (n <= 1) {
            return 0;
        }
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) {
                return r % n;
            }
        }
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t state_[4];
};

// Counter-based sub-seed derivation: every component that needs randomness
// takes derive_seed(master, stream...) so sub-streams stay stable when
// unrelated code adds or removes draws.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> stream) {
    std::uint64_t x = master;
    auto mix = [&x](std::uint64_t v) {
        x ^= v + 0x9e3779b97f4a7c15ULL + (x << 6) + (x >> 2);
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        x = z ^ (z >> 31);
    };
    for (auto v : stream) {
        mix(v);
    }
    return x;
}

}  // namespace plato

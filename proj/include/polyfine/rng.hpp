#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace polyfine {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Mixes an arbitrary list of 64-bit fields into one seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = 0x6a09e667f3bcc908ULL;
    std::uint64_t out = 0;
    for (std::uint64_t p : parts) {
        state ^= p;
        out = splitmix64(state);
    }
    return out;
}

// mt19937_64 core with hand-rolled draw helpers. The standard distributions
// are implementation-defined, these are not, so seeded runs are bit-stable
// across toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return double(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in {0, .., n-1} via rejection, n >= 1.
    int uniform_int(int n) {
        const std::uint64_t bound = std::uint64_t(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return int(x % bound);
    }

    // Draws from a probability vector by CDF inversion. Rows are validated to
    // sum to 1 within tolerance elsewhere; the fallback returns the last
    // positive entry so rounding can never yield an out-of-support index.
    int categorical(const double* p, int n) {
        const double u = uniform01();
        double acc = 0.0;
        int last_pos = -1;
        for (int i = 0; i < n; ++i) {
            if (p[i] > 0.0) last_pos = i;
            acc += p[i];
            if (u < acc) return i;
        }
        return last_pos >= 0 ? last_pos : n - 1;
    }

    int categorical(const std::vector<double>& p) { return categorical(p.data(), int(p.size())); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = std::size_t(uniform_int(int(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Child stream; advances this stream by one draw.
    Rng derive(std::uint64_t tag) { return Rng(mix_seed({engine_(), tag})); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace polyfine

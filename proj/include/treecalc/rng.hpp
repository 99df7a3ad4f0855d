#pragma once

#include <cstdint>
#include <string_view>

namespace treecalc {

// Deterministic splitmix64-based generator. We roll our own uniforms instead
// of <random> distributions so that every byte of output is identical across
// standard library implementations; reproducibility of datasets, shuffles and
// initializations is a contract of this project.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // uniform integer in [0, n), n > 0; multiply-shift, no rejection loop
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    int uniform_int(int lo, int hi_inclusive) {
        return lo + static_cast<int>(next_below(
                        static_cast<std::uint64_t>(hi_inclusive - lo + 1)));
    }

    bool bernoulli(double p) { return next_double() < p; }

private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Named substream derivation: one root seed fans out into independent
// generators ("data", "init", "shuffle", "dropout", "blanks", ...), so each
// component is reproducible on its own.
inline Rng make_stream(std::uint64_t root_seed, std::string_view name) {
    std::uint64_t h = fnv1a(name);
    // one extra mix so that (seed, name) pairs do not collide linearly
    Rng mixer(root_seed ^ (h + 0x632be59bd9b4e019ull));
    mixer.next_u64();
    return Rng(mixer.next_u64());
}

}  // namespace treecalc

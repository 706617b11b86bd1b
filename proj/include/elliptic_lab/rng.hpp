#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace ell {

// Counter-based splittable stream. Output i is mix(key + i*gamma) (SplitMix64
// finalizer), so draws depend only on (key, counter) and substreams derived
// from distinct indices are independent of the order they are consumed in.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : key_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

    // Independent substream keyed by (this stream, index).
    [[nodiscard]] RandomStream derive(std::uint64_t index) const {
        RandomStream child(0);
        child.key_ = mix(key_ ^ mix(index + 0x632be59bd9b4e019ull));
        return child;
    }
    [[nodiscard]] RandomStream derive(std::uint64_t a, std::uint64_t b) const {
        return derive(a).derive(b);
    }

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ull); }

    // Uniform in [0,1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // N(0,1) via Marsaglia polar; second deviate cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    // ±1 with probability 1/2 each.
    double rademacher() { return (next_u64() & 1u) ? 1.0 : -1.0; }

    std::size_t index(std::size_t bound) { return static_cast<std::size_t>(next_u64() % bound); }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebull;
        x ^= x >> 31;
        return x;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ell

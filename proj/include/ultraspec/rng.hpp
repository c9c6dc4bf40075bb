#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ultraspec/rational.hpp"

namespace ultraspec {

// Deterministic source. std::mt19937_64 output is pinned by the standard;
// the distribution helpers below avoid std::uniform_int_distribution, whose
// output is implementation-defined, so streams are identical across
// platforms and toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // uniform integer in [lo, hi]
    long uniform(long lo, long hi) {
        std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return lo + static_cast<long>(x % span);
    }

    bool coin() { return (next() & 1) != 0; }

    // small rational with numerator in [-num_mag, num_mag] and denominator
    // from {1, ..., den_mag}
    Rational small_rational(long num_mag = 4, long den_mag = 3) {
        Rational q(uniform(-num_mag, num_mag), uniform(1, den_mag));
        q.canonicalize();
        return q;
    }

    Rational nonzero_rational(long num_mag = 4, long den_mag = 3) {
        while (true) {
            Rational q = small_rational(num_mag, den_mag);
            if (!is_zero(q)) return q;
        }
    }

    // k pairwise distinct small rationals
    std::vector<Rational> distinct_rationals(int k, long num_mag = 6, long den_mag = 2) {
        std::vector<Rational> out;
        while (static_cast<int>(out.size()) < k) {
            Rational q = small_rational(num_mag, den_mag);
            bool fresh = true;
            for (const auto& p : out)
                if (p == q) fresh = false;
            if (fresh) out.push_back(q);
        }
        return out;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace ultraspec

#pragma once

#include <cmath>
#include <cstdint>

namespace ridesim {

// Small deterministic generator (xoshiro256++ seeded via splitmix64) so that
// seeded runs reproduce bit-identically across platforms and standard-library
// versions, which std::<distribution> implementations do not guarantee.
class Rng {
  public:
    explicit Rng(uint64_t seed = 0) {
        uint64_t x = seed;
        for (auto& word : s_) {
            x += 0x9e3779b97f4a7c15ull;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            word = z ^ (z >> 31);
        }
    }

    uint64_t next_u64() {
        uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // uniform integer in [0, n)
    uint64_t below(uint64_t n) { return n ? next_u64() % n : 0; }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    // Poisson count via Knuth's product method; adequate for the means used
    // here (tens at most in any hot path).
    long poisson(double mean) {
        if (mean <= 0) return 0;
        double limit = std::exp(-mean);
        long n = 0;
        double prod = uniform();
        while (prod > limit) {
            ++n;
            prod *= uniform();
        }
        return n;
    }

  private:
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
    uint64_t s_[4];
};

}  // namespace ridesim

#ifndef CYCSTEER_RNG_HPP
#define CYCSTEER_RNG_HPP

#include <array>
#include <cstdint>

namespace cycsteer {

// Deterministic, serializable RNG. Training runs, dataset generation and
// checkpoints all depend on the exact state layout, so we use a fixed
// xoshiro256** engine instead of the implementation-defined std distributions.
inline uint64_t splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
  public:
    Rng() : Rng(0) {}
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& w : s_) w = splitmix64(x);
    }

    uint64_t next_u64() {
        auto rotl = [](uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform integer in [0, n)
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

    template <typename It>
    void shuffle(It first, It last) {
        auto n = static_cast<uint64_t>(last - first);
        for (uint64_t i = n; i > 1; --i)
            std::swap(first[i - 1], first[next_below(i)]);
    }

    std::array<uint64_t, 4> state() const { return s_; }
    void set_state(const std::array<uint64_t, 4>& s) { s_ = s; }

    // independent stream for a named sub-task (dataset rows, per-network init, ...)
    Rng fork(uint64_t salt) {
        uint64_t x = next_u64() ^ (salt * 0x9e3779b97f4a7c15ull);
        Rng r;
        for (auto& w : r.s_) w = splitmix64(x);
        return r;
    }

  private:
    std::array<uint64_t, 4> s_{};
};

// Derive a stable stream from a tuple of identifiers without consuming
// state from any shared engine (used by the synthetic renderer).
inline Rng derived_rng(uint64_t a, uint64_t b = 0, uint64_t c = 0, uint64_t d = 0) {
    uint64_t x = a;
    uint64_t h = splitmix64(x);
    x ^= b * 0x9e3779b97f4a7c15ull;
    h ^= splitmix64(x);
    x ^= c * 0xbf58476d1ce4e5b9ull;
    h ^= splitmix64(x);
    x ^= d * 0x94d049bb133111ebull;
    h ^= splitmix64(x);
    return Rng(h);
}

}  // namespace cycsteer

#endif

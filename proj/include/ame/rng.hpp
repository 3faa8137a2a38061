#pragma once

#include <cstdint>

namespace ame {

// Counter-based generator (splitmix64). A stream is (key, counter); output n is a
// pure function of both, so streams can be checkpointed and resumed exactly by
// storing two integers, and derived streams never overlap in practice.
class CounterRng {
public:
    CounterRng() = default;
    CounterRng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

    // Derive an independent stream from a seed and a stream id.
    static CounterRng derive(std::uint64_t seed, std::uint64_t stream) {
        return CounterRng(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ULL)));
    }

    std::uint64_t next_u64() {
        ++counter_;
        return mix(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, n). Modulo bias is < n / 2^64, negligible for our n.
    std::uint64_t next_below(std::uint64_t n) {
        return next_u64() % n;
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace ame

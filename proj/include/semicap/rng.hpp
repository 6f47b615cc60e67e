// Counter-based SplitMix64 stream.
//
// Draw i of stream `key` is mix64(key + (i + 1) * 0x9E3779B97F4A7C15), where
// mix64 is the SplitMix64 finalizer (Steele, Lea, Flood 2014). The output is a
// pure function of (key, i), so sampling is reproducible on every platform and
// in any language that implements the same two lines.
#pragma once

#include <cstdint>
#include <span>

namespace semicap {

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

    constexpr std::uint64_t at(std::uint64_t counter) const {
        return mix64(key_ + (counter + 1) * 0x9E3779B97F4A7C15ull);
    }
    // Uniform in [0, 1) with 53 random bits.
    constexpr double uniform_at(std::uint64_t counter) const {
        return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
    }

    std::uint64_t next() { return at(counter_++); }
    double uniform() { return uniform_at(counter_++); }
    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Inverse-CDF draw from a finite distribution.
inline std::size_t sample_index(std::span<const double> probs, double u) {
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) {
            continue;
        }
        last = i;
        acc += probs[i];
        if (u < acc) {
            return i;
        }
    }
    return last;
}

} // namespace semicap

#ifndef CHIRPLAB_RNG_HPP
#define CHIRPLAB_RNG_HPP

#include <cstdint>
#include <vector>

namespace chirplab {

/// SplitMix64 generator (Steele, Lea & Flood, 2014). Chosen over std::mt19937
/// because its output sequence is fully pinned by this header: every shuffle,
/// split, and weight init in the project reproduces bit-for-bit on any
/// platform given the same seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) using the top 53 bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). Uses modulo reduction; the bias is
    /// below 2^-50 for the index ranges seen here and the result is the
    /// same on every platform, which is what the determinism contract needs.
    std::uint64_t next_below(std::uint64_t bound) {
        return next() % bound;
    }

private:
    std::uint64_t state_;
};

/// In-place Fisher-Yates shuffle driven by the given generator.
template <typename T>
void fisher_yates_shuffle(std::vector<T>& items, SplitMix64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace chirplab

#endif

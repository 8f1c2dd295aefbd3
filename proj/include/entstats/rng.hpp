#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace entstats {

// splitmix64 generator. The std distributions are implementation-defined,
// so everything that must reproduce byte-identically draws from this.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // {0, ..., n-1}, n > 0
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::uint64_t state_;
};

// Stable sub-seed for a named stage. One root seed fans out to every
// consumer of randomness in the pipeline.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stage, std::uint64_t index = 0);

// Index draw proportional to nonnegative weights (inverse CDF on one
// uniform). Throws if the weights are empty or all zero.
std::size_t sample_categorical(Rng& rng, const std::vector<double>& weights);

} // namespace entstats

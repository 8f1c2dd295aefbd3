#include "entstats/rng.hpp"

#include "entstats/core.hpp"

namespace entstats {

std::uint64_t derive_seed(std::uint64_t root, std::string_view stage, std::uint64_t index) {
    // FNV-1a over the stage name, then mix root and index through splitmix.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : stage) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    Rng mix(root ^ h);
    std::uint64_t s = mix.next_u64();
    Rng mix2(s ^ (index * 0x9e3779b97f4a7c15ULL + 1));
    return mix2.next_u64();
}

std::size_t sample_categorical(Rng& rng, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw Error("sample_categorical: negative weight");
        total += w;
    }
    if (weights.empty() || total <= 0.0) throw Error("sample_categorical: no positive weight");
    const double u = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

} // namespace entstats

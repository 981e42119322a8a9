#pragma once

#include <cstdint>
#include <string_view>

#include "pxmix/util.hpp"

namespace pxmix {

// SplitMix64. All pipeline randomness flows through this generator so that
// runs are reproducible from a single seed across platforms; per-document
// substreams are keyed by (seed, doc_id) and agree between serial and
// sharded execution.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n); rejection-free Lemire reduction is overkill here,
    // modulo bias is < 2^-32 for the n used in this codebase.
    std::uint64_t bounded(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  private:
    std::uint64_t state_;
};

inline SplitMix64 doc_substream(std::uint64_t seed, std::string_view doc_id) {
    return SplitMix64(mix64(seed ^ fnv1a64(doc_id)));
}

}  // namespace pxmix

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pxmix/compressor.hpp"
#include "pxmix/corpus.hpp"
#include "pxmix/rng.hpp"
#include "pxmix/segmenter.hpp"
#include "pxmix/util.hpp"

namespace pxmix {

// --- Levenshtein ------------------------------------------------------------

inline constexpr std::size_t kLevenshteinCap = 4096;

// Banded DP with threshold k: exact if the true distance is <= k, otherwise
// returns k + 1.
template <class Seq>
std::uint64_t levenshtein_banded(const Seq& a, const Seq& b, std::uint64_t k) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    if (n > m) return levenshtein_banded(b, a, k);
    if (m - n > k) return k + 1;
    const std::uint64_t inf = k + 1;
    // row window [lo, hi] around the diagonal
    std::vector<std::uint64_t> prev(m + 1, inf);
    std::vector<std::uint64_t> cur(m + 1, inf);
    for (std::size_t j = 0; j <= std::min<std::size_t>(m, k); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        std::size_t lo = i > k ? i - k : 0;
        std::size_t hi = std::min(m, i + k);
        cur[lo] = inf;
        if (lo == 0) cur[0] = i;
        for (std::size_t j = std::max<std::size_t>(lo, 1); j <= hi; ++j) {
            std::uint64_t best = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            if (j > lo || lo == 0) best = std::min(best, cur[j - 1] + 1);
            if (j < i + k) best = std::min(best, prev[j] + 1);
            cur[j] = std::min(best, inf);
        }
        std::swap(prev, cur);
        std::fill(cur.begin(), cur.end(), inf);
    }
    return prev[m];
}

// Exact distance by band doubling; cheap for similar sequences, which is the
// common case in the stability study.
template <class Seq>
std::uint64_t levenshtein(const Seq& a, const Seq& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::uint64_t k = std::max<std::uint64_t>(1, n > m ? n - m : m - n);
    const std::uint64_t upper = std::max(n, m);
    for (;;) {
        std::uint64_t d = levenshtein_banded(a, b, k);
        if (d <= k) return d;
        if (k >= upper) return d;
        k = std::min<std::uint64_t>(upper, k * 2);
    }
}

struct NormalizedDistance {
    double value = 0.0;
    std::uint64_t distance = 0;
    bool truncated = false;
};

// Edit distance divided by max length; 0/0 is defined as 0. Sequences longer
// than `cap` are truncated and flagged to bound runtime.
template <class Seq>
NormalizedDistance normalized_levenshtein_detail(const Seq& a, const Seq& b, std::size_t cap = kLevenshteinCap) {
    NormalizedDistance out;
    if (a.size() <= cap && b.size() <= cap) {
        out.distance = levenshtein(a, b);
        std::size_t denom = std::max(a.size(), b.size());
        out.value = denom == 0 ? 0.0 : static_cast<double>(out.distance) / static_cast<double>(denom);
        return out;
    }
    out.truncated = true;
    Seq ta(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(std::min(a.size(), cap)));
    Seq tb(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(std::min(b.size(), cap)));
    out.distance = levenshtein(ta, tb);
    std::size_t denom = std::max(ta.size(), tb.size());
    out.value = denom == 0 ? 0.0 : static_cast<double>(out.distance) / static_cast<double>(denom);
    return out;
}

inline double normalized_levenshtein(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    return normalized_levenshtein_detail(a, b).value;
}

inline double normalized_levenshtein(const std::string& a, const std::string& b) {
    return normalized_levenshtein_detail(a, b).value;
}

// --- Perturbation -----------------------------------------------------------

// Byte offsets of Unicode scalar starts, or empty if the input is not
// structurally valid UTF-8.
inline std::vector<std::size_t> utf8_scalar_offsets(std::string_view s) {
    std::vector<std::size_t> offsets;
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len;
        if (c < 0x80) {
            len = 1;
        } else if ((c & 0xe0) == 0xc0) {
            len = 2;
        } else if ((c & 0xf0) == 0xe0) {
            len = 3;
        } else if ((c & 0xf8) == 0xf0) {
            len = 4;
        } else {
            return {};
        }
        if (i + len > s.size()) return {};
        for (std::size_t j = 1; j < len; ++j)
            if ((static_cast<unsigned char>(s[i + j]) & 0xc0) != 0x80) return {};
        offsets.push_back(i);
        i += len;
    }
    return offsets;
}

struct PerturbResult {
    std::string text;
    bool byte_granularity = false;  // input was not valid UTF-8
};

// Deletes exactly floor(frac * n) characters (Unicode scalars) at positions
// chosen uniformly without replacement. Invalid UTF-8 inputs fall back to
// byte granularity, flagged in the result.
inline PerturbResult perturb_delete(std::string_view doc, double frac, SplitMix64& rng) {
    if (!(frac >= 0.0 && frac <= 1.0)) throw UsageError("deletion fraction must be in [0, 1]");
    PerturbResult out;
    std::vector<std::size_t> starts = utf8_scalar_offsets(doc);
    if (starts.empty() && !doc.empty()) {
        out.byte_granularity = true;
        starts.resize(doc.size());
        std::iota(starts.begin(), starts.end(), 0);
    }
    const std::size_t n = starts.size();
    const auto drop = static_cast<std::size_t>(std::floor(frac * static_cast<double>(n)));
    if (drop == 0) {
        out.text = std::string(doc);
        return out;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < drop; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.bounded(n - i));
        std::swap(order[i], order[j]);
    }
    std::vector<bool> dead(n, false);
    for (std::size_t i = 0; i < drop; ++i) dead[order[i]] = true;
    out.text.reserve(doc.size());
    for (std::size_t c = 0; c < n; ++c) {
        if (dead[c]) continue;
        std::size_t end = c + 1 < n ? starts[c + 1] : doc.size();
        out.text.append(doc.substr(starts[c], end - starts[c]));
    }
    return out;
}

// --- Stability --------------------------------------------------------------

struct StabilityReport {
    std::vector<double> distances;  // per sample, in [0, 1]
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;
    std::size_t samples = 0;
    std::size_t truncated = 0;
    std::size_t byte_granularity_docs = 0;
    double deletion_frac = 0.0;
    std::uint64_t seed = 0;
};

inline StabilityReport stability_study(std::span<const CorpusDoc> sample, const ProxyCompressor& compressor, double frac,
                                       std::uint64_t seed, unsigned workers = 1) {
    if (sample.empty()) throw UsageError("stability study needs a nonempty sample");
    StabilityReport rep;
    rep.deletion_frac = frac;
    rep.seed = seed;
    rep.samples = sample.size();
    rep.distances.assign(sample.size(), 0.0);
    std::vector<std::uint8_t> truncated(sample.size(), 0);
    std::vector<std::uint8_t> byte_granularity(sample.size(), 0);
    parallel_for(sample.size(), workers, [&](std::size_t i) {
        const CorpusDoc& doc = sample[i];
        SplitMix64 rng = doc_substream(seed, doc.id);
        PerturbResult perturbed = perturb_delete(doc.text, frac, rng);
        auto before = compressor.compress(doc.text);
        auto after = compressor.compress(perturbed.text);
        NormalizedDistance d = normalized_levenshtein_detail(before, after);
        rep.distances[i] = d.value;
        truncated[i] = d.truncated ? 1 : 0;
        byte_granularity[i] = perturbed.byte_granularity ? 1 : 0;
    });
    rep.truncated = static_cast<std::size_t>(std::count(truncated.begin(), truncated.end(), 1));
    rep.byte_granularity_docs = static_cast<std::size_t>(std::count(byte_granularity.begin(), byte_granularity.end(), 1));
    std::vector<double> sorted = rep.distances;
    std::sort(sorted.begin(), sorted.end());
    rep.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    rep.median = sorted[(sorted.size() - 1) / 2];
    rep.p95 = nearest_rank_percentile(sorted, 95.0);
    return rep;
}

// --- Collisions -------------------------------------------------------------

// Longest common prefix of all chunks divided by their mean length.
inline double lcp_ratio(const std::set<std::string>& chunks) {
    if (chunks.size() < 2) throw UsageError("LCP ratio needs at least 2 chunks");
    auto it = chunks.begin();
    std::string_view prefix = *it;
    double total_len = static_cast<double>(it->size());
    for (++it; it != chunks.end(); ++it) {
        std::size_t k = 0;
        while (k < prefix.size() && k < it->size() && prefix[k] == (*it)[k]) ++k;
        prefix = prefix.substr(0, k);
        total_len += static_cast<double>(it->size());
    }
    double mean_len = total_len / static_cast<double>(chunks.size());
    return mean_len == 0.0 ? 0.0 : static_cast<double>(prefix.size()) / mean_len;
}

struct CollisionGroup {
    std::set<std::string> chunks;  // distinct source byte chunks
    double lcp = 0.0;
    double mean_len = 0.0;
    double len_stddev = 0.0;
};

struct CollisionReport {
    // key: compressed symbol sequence, serialized little-endian
    std::map<std::string, std::set<std::string>> groups;
    std::map<std::size_t, std::size_t> size_histogram;  // group size -> count
    std::vector<CollisionGroup> collisions;             // groups with >= 2 distinct chunks
    std::size_t segments_total = 0;

    std::size_t collision_count() const { return collisions.size(); }
};

inline std::string symbol_key(std::span<const std::uint32_t> symbols) {
    std::string key;
    key.reserve(symbols.size() * 4);
    for (std::uint32_t s : symbols) put_le<std::uint32_t>(key, s);
    return key;
}

inline void finalize_collision_report(CollisionReport& rep) {
    for (const auto& [key, chunks] : rep.groups) {
        ++rep.size_histogram[chunks.size()];
        if (chunks.size() < 2) continue;
        CollisionGroup g;
        g.chunks = chunks;
        g.lcp = lcp_ratio(chunks);
        double sum = 0.0;
        for (const std::string& c : chunks) sum += static_cast<double>(c.size());
        g.mean_len = sum / static_cast<double>(chunks.size());
        double var = 0.0;
        for (const std::string& c : chunks) {
            double d = static_cast<double>(c.size()) - g.mean_len;
            var += d * d;
        }
        g.len_stddev = std::sqrt(var / static_cast<double>(chunks.size()));
        rep.collisions.push_back(std::move(g));
    }
    std::sort(rep.collisions.begin(), rep.collisions.end(),
              [](const CollisionGroup& a, const CollisionGroup& b) { return a.chunks.size() > b.chunks.size(); });
}

// Segments every document with the neural stack and groups the segment byte
// chunks by their packed symbol output. Groups holding >= 2 distinct chunks
// are the collisions of the many-to-one compressed mapping.
template <class Model>
CollisionReport collision_study(std::span<const std::string> docs, const NeuralCompressor<Model>& compressor) {
    CollisionReport rep;
    for (const std::string& doc : docs) {
        if (doc.empty()) continue;
        for (const Segment& seg : compressor.segment_doc(doc)) {
            std::string_view chunk = seg.bytes(doc);
            SegmentCache::Entry coded = compressor.coded_segment(chunk);
            rep.groups[symbol_key(coded.symbols)].insert(std::string(chunk));
            ++rep.segments_total;
        }
    }
    finalize_collision_report(rep);
    return rep;
}

// Whole-document variant: groups full documents by their complete compressed
// symbol sequence under any proxy compressor.
inline CollisionReport document_collision_study(std::span<const std::string> docs, const ProxyCompressor& compressor) {
    CollisionReport rep;
    for (const std::string& doc : docs) {
        if (doc.empty()) continue;
        rep.groups[symbol_key(compressor.compress(doc))].insert(doc);
        ++rep.segments_total;
    }
    finalize_collision_report(rep);
    return rep;
}

}  // namespace pxmix

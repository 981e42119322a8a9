#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pxmix/byte_model.hpp"
#include "pxmix/util.hpp"

namespace pxmix {

struct SegmentConfig {
    double abs_percentile = 95.0;   // threshold percentile for h_t
    double jump_percentile = 95.0;  // threshold percentile for dh_t = h_t - h_{t-1}
    std::uint64_t calibration_bytes = 1 << 20;  // cap on pooled bytes when calibrating; 0 = no cap
    std::size_t min_segment_len = 1;

    void validate() const {
        if (!(abs_percentile > 0.0 && abs_percentile <= 100.0)) throw UsageError("abs percentile must be in (0, 100]");
        if (!(jump_percentile > 0.0 && jump_percentile <= 100.0)) throw UsageError("jump percentile must be in (0, 100]");
        if (min_segment_len < 1) throw UsageError("min segment length must be >= 1");
    }
};

struct Segment {
    std::size_t start = 0;
    std::size_t end = 0;  // exclusive

    std::string_view bytes(std::string_view doc) const { return doc.substr(start, end - start); }
};

struct SegmentThresholds {
    double theta_abs = std::numeric_limits<double>::infinity();
    double theta_jump = std::numeric_limits<double>::infinity();
};

// Nearest-rank percentile: value at rank ceil(p/100 * n) of the ascending
// sort, 1-based. No interpolation.
inline double nearest_rank_percentile(std::vector<double> values, double p) {
    if (values.empty()) throw UsageError("percentile of an empty sample");
    if (!(p > 0.0 && p <= 100.0)) throw UsageError("percentile must be in (0, 100]");
    std::sort(values.begin(), values.end());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
    rank = std::max<std::size_t>(rank, 1);
    return values[rank - 1];
}

// Fits the global thresholds once per (model, corpus): theta_abs from the
// pooled per-byte entropies of the sample, theta_jump from the pooled
// one-step rises. If the pooled jump sample is empty (all docs of length 1)
// the jump criterion is disabled.
template <class Model>
SegmentThresholds calibrate_thresholds(std::span<const std::string> sample, const Model& model, const SegmentConfig& cfg) {
    cfg.validate();
    if (sample.empty()) throw UsageError("threshold calibration needs a nonempty sample");
    std::vector<double> pooled_h;
    std::vector<double> pooled_dh;
    std::uint64_t budget = cfg.calibration_bytes;
    for (const std::string& doc : sample) {
        if (doc.empty()) continue;
        std::vector<double> h = model.entropy_profile(doc);
        for (std::size_t t = 0; t < h.size(); ++t) {
            pooled_h.push_back(h[t]);
            if (t >= 1) pooled_dh.push_back(h[t] - h[t - 1]);
        }
        if (budget > 0 && pooled_h.size() >= budget) break;
    }
    if (pooled_h.empty()) throw UsageError("threshold calibration needs a nonempty sample");
    SegmentThresholds th;
    th.theta_abs = nearest_rank_percentile(std::move(pooled_h), cfg.abs_percentile);
    th.theta_jump = pooled_dh.empty() ? std::numeric_limits<double>::infinity()
                                      : nearest_rank_percentile(std::move(pooled_dh), cfg.jump_percentile);
    return th;
}

// Positions t >= 1 where h_t >= theta_abs or h_t - h_{t-1} >= theta_jump
// start a new segment; candidates closer than min_segment_len to the last
// accepted start (position 0 counts as accepted) are dropped left to right.
inline std::vector<std::size_t> find_boundaries(std::span<const double> profile, SegmentThresholds th, const SegmentConfig& cfg) {
    cfg.validate();
    if (profile.empty()) throw UsageError("boundary search on an empty profile");
    std::vector<std::size_t> boundaries;
    std::size_t prev = 0;
    for (std::size_t t = 1; t < profile.size(); ++t) {
        bool hit = profile[t] >= th.theta_abs || (profile[t] - profile[t - 1]) >= th.theta_jump;
        if (hit && t - prev >= cfg.min_segment_len) {
            boundaries.push_back(t);
            prev = t;
        }
    }
    return boundaries;
}

inline std::vector<Segment> segments_from_boundaries(std::size_t doc_len, std::span<const std::size_t> boundaries) {
    std::vector<Segment> segs;
    std::size_t start = 0;
    for (std::size_t b : boundaries) {
        segs.push_back({start, b});
        start = b;
    }
    segs.push_back({start, doc_len});
    return segs;
}

template <class Model>
std::vector<Segment> segment_entropy(std::string_view doc, const Model& model, SegmentThresholds th, const SegmentConfig& cfg) {
    if (doc.empty()) throw UsageError("cannot segment an empty document");
    std::vector<double> h = model.entropy_profile(doc);
    auto boundaries = find_boundaries(h, th, cfg);
    return segments_from_boundaries(doc.size(), boundaries);
}

// Trivial alternatives used by the segmentation ablations: fixed-size tiles
// and newline splits (a segment ends just after each 0x0A).
inline std::vector<Segment> segment_fixed(std::string_view doc, std::size_t len) {
    if (doc.empty()) throw UsageError("cannot segment an empty document");
    if (len < 1) throw UsageError("fixed segment length must be >= 1");
    std::vector<Segment> segs;
    for (std::size_t start = 0; start < doc.size(); start += len)
        segs.push_back({start, std::min(doc.size(), start + len)});
    return segs;
}

inline std::vector<Segment> segment_lines(std::string_view doc) {
    if (doc.empty()) throw UsageError("cannot segment an empty document");
    std::vector<Segment> segs;
    std::size_t start = 0;
    for (std::size_t t = 0; t < doc.size(); ++t) {
        if (doc[t] == '\n') {
            segs.push_back({start, t + 1});
            start = t + 1;
        }
    }
    if (start < doc.size()) segs.push_back({start, doc.size()});
    return segs;
}

}  // namespace pxmix

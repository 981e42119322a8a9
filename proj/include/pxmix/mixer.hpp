#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pxmix/compressor.hpp"
#include "pxmix/rng.hpp"
#include "pxmix/util.hpp"
#include "pxmix/vocab.hpp"

namespace pxmix {

struct WarmupConfig {
    double rate_start = 0.4;  // a
    double rate_end = 0.9;    // b
    std::uint64_t steps = 10000;
};

enum class PairingMode { None, WarmupOnly, AlwaysOn };
enum class PairOrder { Randomized, RawFirst, CompFirst };

inline std::string_view pairing_mode_name(PairingMode m) {
    switch (m) {
        case PairingMode::None: return "none";
        case PairingMode::WarmupOnly: return "warmup";
        case PairingMode::AlwaysOn: return "always";
    }
    throw UsageError("unknown pairing mode");
}

inline PairingMode pairing_mode_from_name(std::string_view name) {
    if (name == "none") return PairingMode::None;
    if (name == "warmup") return PairingMode::WarmupOnly;
    if (name == "always") return PairingMode::AlwaysOn;
    throw UsageError("unknown pairing mode: " + std::string(name));
}

inline std::string_view pair_order_name(PairOrder o) {
    switch (o) {
        case PairOrder::Randomized: return "random";
        case PairOrder::RawFirst: return "raw-first";
        case PairOrder::CompFirst: return "comp-first";
    }
    throw UsageError("unknown pair order");
}

inline PairOrder pair_order_from_name(std::string_view name) {
    if (name == "random") return PairOrder::Randomized;
    if (name == "raw-first") return PairOrder::RawFirst;
    if (name == "comp-first") return PairOrder::CompFirst;
    throw UsageError("unknown pair order: " + std::string(name));
}

struct MixConfig {
    double rate_final = 0.9;  // r after warm-up
    std::optional<WarmupConfig> warmup;
    PairingMode pairing = PairingMode::None;
    PairOrder pair_order = PairOrder::Randomized;
    std::uint64_t seed = 0;
    std::uint64_t docs_per_step = 1;  // documents advancing one schedule step

    void validate() const {
        if (!(rate_final >= 0.0 && rate_final <= 1.0)) throw UsageError("mixing rate must be in [0, 1]");
        if (warmup) {
            if (!(warmup->rate_start >= 0.0 && warmup->rate_start <= 1.0 && warmup->rate_end >= 0.0 && warmup->rate_end <= 1.0))
                throw UsageError("warmup rates must be in [0, 1]");
            if (warmup->steps < 1) throw UsageError("warmup steps must be >= 1");
        }
        if (docs_per_step < 1) throw UsageError("docs per step must be >= 1");
    }
};

// r(i): linear warm-up from a to b over T steps, then the final rate.
inline double mix_rate(std::uint64_t step, const MixConfig& cfg) {
    if (!cfg.warmup) return cfg.rate_final;
    const WarmupConfig& w = *cfg.warmup;
    if (step > w.steps) return cfg.rate_final;
    double r = w.rate_start + (w.rate_end - w.rate_start) * static_cast<double>(step) / static_cast<double>(w.steps);
    return std::clamp(r, std::min(w.rate_start, w.rate_end), std::max(w.rate_start, w.rate_end));
}

// Calibrated pairing rate r': mixing translation pairs with probability r'
// against compressed samples (r > 0.5) or raw samples (r <= 0.5) makes the
// effective compressed:raw sample fraction hit the target r.
inline double calibrated_pair_rate(double r) {
    if (!(r > 0.0 && r < 1.0)) throw UsageError("pairing is undefined at mixing rates 0 and 1");
    return r > 0.5 ? 1.0 / r - 1.0 : r / (1.0 - r);
}

// N'/N_b without pairing: how many more documents the mixture consumes per
// symbol budget than a pure raw-byte stream.
inline double effective_multiplier(double r, double compression_rate) {
    if (!(r >= 0.0 && r <= 1.0)) throw UsageError("mixing rate must be in [0, 1]");
    if (!(compression_rate > 0.0)) throw UsageError("compression rate must be > 0");
    return 1.0 / (r / compression_rate + (1.0 - r));
}

// N'/N_b with translation pairing at the calibrated rate.
inline double pairing_multiplier(double r, double compression_rate) {
    if (!(compression_rate > 0.0)) throw UsageError("compression rate must be > 0");
    if (!(r > 0.0 && r < 1.0)) throw UsageError("pairing is undefined at mixing rates 0 and 1");
    if (r > 0.5) return 1.0 / (1.0 / compression_rate + 1.0 / r - 1.0);
    double rp = r / (1.0 - r);
    return 1.0 / (1.0 + rp / compression_rate);
}

// Per-step multiplier under pairing, defined for the full [0, 1] range the
// warm-up schedule sweeps (the formulas are continuous at the endpoints).
inline double pairing_step_multiplier(double r, double compression_rate) {
    if (r > 0.5) {
        double rp = 1.0 / r - 1.0;
        return 1.0 / (rp + 1.0 / compression_rate);
    }
    double rp = r >= 1.0 ? 0.0 : r / (1.0 - r);
    return 1.0 / (1.0 + rp / compression_rate);
}

// Mean of the per-step pairing multiplier over warm-up steps 1..T, by direct
// summation of the annealed schedule.
inline double warmup_average_multiplier(const MixConfig& cfg, double compression_rate) {
    if (!cfg.warmup) throw UsageError("warmup average requires a warmup schedule");
    if (!(compression_rate > 0.0)) throw UsageError("compression rate must be > 0");
    const WarmupConfig& w = *cfg.warmup;
    double sum = 0.0;
    for (std::uint64_t i = 1; i <= w.steps; ++i) {
        double r = w.rate_start + (w.rate_end - w.rate_start) * static_cast<double>(i) / static_cast<double>(w.steps);
        sum += pairing_step_multiplier(r, compression_rate);
    }
    return sum / static_cast<double>(w.steps);
}

enum class ViewKind { Raw, Comp, PairRawFirst, PairCompFirst };

inline std::string_view view_kind_name(ViewKind k) {
    switch (k) {
        case ViewKind::Raw: return "raw";
        case ViewKind::Comp: return "comp";
        case ViewKind::PairRawFirst: return "pair-raw-first";
        case ViewKind::PairCompFirst: return "pair-comp-first";
    }
    throw UsageError("unknown view kind");
}

inline ViewKind view_kind_from_name(std::string_view name) {
    if (name == "raw") return ViewKind::Raw;
    if (name == "comp") return ViewKind::Comp;
    if (name == "pair-raw-first") return ViewKind::PairRawFirst;
    if (name == "pair-comp-first") return ViewKind::PairCompFirst;
    throw UsageError("unknown view kind: " + std::string(name));
}

// One document rendered into the unified symbol space, sentinel-framed:
//   Raw:  <raw> bytes </raw>
//   Comp: <comp> symbols </comp>
//   Pair: both framings concatenated in the chosen order.
struct DocumentView {
    std::string doc_id;
    ViewKind kind = ViewKind::Raw;
    std::vector<SymbolId> symbols;
    std::uint64_t raw_len = 0;   // source bytes
    std::uint64_t comp_len = 0;  // compressed symbols (content only)
};

// Representation assignment for one document. The per-document substream
// keyed by (seed, doc_id) makes assignments independent of worker count and
// processing order.
inline ViewKind assign_view_kind(std::string_view doc_id, std::uint64_t step, const MixConfig& cfg) {
    cfg.validate();
    SplitMix64 rng = doc_substream(cfg.seed, doc_id);
    double r = mix_rate(step, cfg);
    bool pairing_active = cfg.pairing == PairingMode::AlwaysOn ||
                          (cfg.pairing == PairingMode::WarmupOnly && cfg.warmup && step < cfg.warmup->steps);
    ViewKind kind;
    if (pairing_active) {
        double rp = calibrated_pair_rate(r);  // throws at r in {0, 1}
        bool pair = rng.next_unit() < rp;
        if (pair) {
            PairOrder order = cfg.pair_order;
            if (order == PairOrder::Randomized) order = rng.next_unit() < 0.5 ? PairOrder::RawFirst : PairOrder::CompFirst;
            kind = order == PairOrder::RawFirst ? ViewKind::PairRawFirst : ViewKind::PairCompFirst;
        } else {
            kind = r > 0.5 ? ViewKind::Comp : ViewKind::Raw;
        }
    } else {
        kind = rng.next_unit() < r ? ViewKind::Comp : ViewKind::Raw;
    }
    return kind;
}

inline void append_raw_framing(std::vector<SymbolId>& out, std::string_view doc) {
    out.push_back(id_of(Sentinel::RawOpen));
    for (unsigned char c : doc) out.push_back(byte_to_symbol(c));
    out.push_back(id_of(Sentinel::RawClose));
}

inline void append_comp_framing(std::vector<SymbolId>& out, std::span<const std::uint32_t> local, const VocabLayout& layout) {
    out.push_back(id_of(Sentinel::CompOpen));
    for (std::uint32_t s : local) out.push_back(layout.comp_to_symbol(s));
    out.push_back(id_of(Sentinel::CompClose));
}

inline DocumentView render_view(std::string doc_id, std::string_view doc, ViewKind kind,
                                std::span<const std::uint32_t> comp_local, const VocabLayout& layout) {
    DocumentView v;
    v.doc_id = std::move(doc_id);
    v.kind = kind;
    v.raw_len = doc.size();
    v.comp_len = comp_local.size();
    switch (kind) {
        case ViewKind::Raw:
            append_raw_framing(v.symbols, doc);
            break;
        case ViewKind::Comp:
            append_comp_framing(v.symbols, comp_local, layout);
            break;
        case ViewKind::PairRawFirst:
            append_raw_framing(v.symbols, doc);
            append_comp_framing(v.symbols, comp_local, layout);
            break;
        case ViewKind::PairCompFirst:
            append_comp_framing(v.symbols, comp_local, layout);
            append_raw_framing(v.symbols, doc);
            break;
    }
    return v;
}

// Fixed-length context with document-boundary records. Spans tile the real
// symbols [0, fill); the trailing context_len - fill symbols are DocSep
// padding. A view larger than the remaining space is split across contexts
// and each context records its own span for the continuation.
struct PackedContext {
    struct Span {
        std::uint32_t start = 0;
        std::uint32_t end = 0;  // exclusive
        std::string doc_id;
        ViewKind kind = ViewKind::Raw;
        bool continued = false;  // true when this span continues a split view
    };

    std::vector<SymbolId> symbols;
    std::vector<Span> spans;
    std::uint32_t fill = 0;
};

class ContextPacker {
  public:
    explicit ContextPacker(std::uint32_t context_len) : context_len_(context_len) {
        if (context_len < 2) throw UsageError("context length must be >= 2");
        reset();
    }

    template <class Sink>
    void add(const DocumentView& view, Sink&& sink) {
        std::size_t offset = 0;
        bool continued = false;
        while (offset < view.symbols.size()) {
            std::uint32_t space = context_len_ - current_.fill;
            auto take = static_cast<std::uint32_t>(std::min<std::size_t>(space, view.symbols.size() - offset));
            PackedContext::Span span;
            span.start = current_.fill;
            span.end = current_.fill + take;
            span.doc_id = view.doc_id;
            span.kind = view.kind;
            span.continued = continued;
            for (std::uint32_t i = 0; i < take; ++i) current_.symbols[current_.fill + i] = view.symbols[offset + i];
            current_.fill += take;
            current_.spans.push_back(std::move(span));
            offset += take;
            continued = true;
            if (current_.fill == context_len_) {
                sink(std::move(current_));
                reset();
            }
        }
    }

    // Emits the final partial context, if any.
    template <class Sink>
    void flush(Sink&& sink) {
        if (current_.fill > 0) {
            sink(std::move(current_));
            reset();
        }
    }

  private:
    void reset() {
        current_ = PackedContext{};
        current_.symbols.assign(context_len_, id_of(Sentinel::DocSep));
        current_.fill = 0;
    }

    std::uint32_t context_len_;
    PackedContext current_;
};

// Evaluation prompt for in-context translation: the compressed problem and
// oracle solution, then the raw problem left open for the model to continue
// (no closing raw sentinel).
inline std::vector<SymbolId> build_oracle_translation_prompt(std::string_view prompt_raw, std::string_view solution_raw,
                                                             const ProxyCompressor& compressor, const VocabLayout& layout) {
    if (prompt_raw.empty() || solution_raw.empty()) throw UsageError("oracle prompt inputs must be nonempty");
    std::vector<SymbolId> out;
    out.push_back(id_of(Sentinel::CompOpen));
    for (std::uint32_t s : compressor.compress(prompt_raw)) out.push_back(layout.comp_to_symbol(s));
    for (std::uint32_t s : compressor.compress(solution_raw)) out.push_back(layout.comp_to_symbol(s));
    out.push_back(id_of(Sentinel::CompClose));
    out.push_back(id_of(Sentinel::RawOpen));
    for (unsigned char c : prompt_raw) out.push_back(byte_to_symbol(c));
    return out;
}

}  // namespace pxmix

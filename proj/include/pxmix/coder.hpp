#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pxmix/arith.hpp"
#include "pxmix/bitio.hpp"
#include "pxmix/util.hpp"

namespace pxmix {

struct WindowConfig {
    // bits per equal-information window; nullopt = single unwindowed code
    std::optional<std::uint32_t> tau;

    static WindowConfig unwindowed() { return WindowConfig{std::nullopt}; }
    static WindowConfig equal_info(std::uint32_t tau) {
        if (tau < 1) throw UsageError("window size must be >= 1 bit");
        return WindowConfig{tau};
    }
};

struct PackingConfig {
    std::uint32_t bits_per_symbol = 16;

    PackingConfig() = default;
    explicit PackingConfig(std::uint32_t n) : bits_per_symbol(n) {
        if (n != 8 && n != 16) throw UsageError("packing supports 8 or 16 bits per symbol");
    }

    std::uint32_t vocab_size() const { return 1u << bits_per_symbol; }
};

// Arithmetic-coder output chunked into equal-information windows. The bit
// stream is stored concatenated; window i occupies [i*tau, (i+1)*tau) with
// only the final window allowed to fall short. consumed_bytes[i] records how
// many source bytes finished inside window i (zero when a long code or its
// termination spilled across a whole window).
struct WindowedCode {
    BitVec bits;
    std::optional<std::uint32_t> tau;
    std::vector<std::uint64_t> consumed_bytes;

    std::uint64_t total_bits() const { return bits.nbits; }
    std::size_t window_count() const { return consumed_bytes.size(); }

    std::uint64_t window_bits(std::size_t i) const {
        if (i >= consumed_bytes.size()) throw DataError("window index out of range");
        if (!tau) return bits.nbits;
        std::uint64_t start = static_cast<std::uint64_t>(i) * *tau;
        std::uint64_t end = std::min<std::uint64_t>(start + *tau, bits.nbits);
        return end - start;
    }
};

// Model concept: `ByteFreqs next_frequencies(std::string_view run_context)`.
// The context passed in is only the bytes coded since the last window reset
// (the "truncated context"); for unwindowed coding it is the full prefix.
//
// Window rule: after each byte, if the materialized bit count has reached
// the current window's tau boundary, the code is terminated, exactly tau
// bits form the window, and the remainder of the terminated code carries
// over into the next window; coder state and model context restart. The
// carry is kept, not discarded, so decoding stays exact.
template <class Model>
WindowedCode ac_encode(std::string_view doc, const Model& model, WindowConfig w) {
    if (doc.empty()) throw UsageError("cannot encode an empty document");
    BitWriter out;
    WindowedCode code;
    code.tau = w.tau;

    const bool windowed = w.tau.has_value();
    const std::uint64_t tau = windowed ? *w.tau : 0;
    std::uint64_t win_start = 0;
    std::size_t run_start = 0;
    std::uint64_t run_bytes = 0;
    ArithmeticEncoder enc(&out);

    for (std::size_t t = 0; t < doc.size(); ++t) {
        ByteFreqs fr = model.next_frequencies(doc.substr(run_start, t - run_start));
        enc.encode_byte(fr, static_cast<std::uint8_t>(doc[t]));
        ++run_bytes;
        if (windowed && out.size_bits() >= win_start + tau) {
            enc.finish();
            code.consumed_bytes.push_back(run_bytes);
            run_bytes = 0;
            win_start += tau;
            while (out.size_bits() >= win_start + tau) {
                code.consumed_bytes.push_back(0);
                win_start += tau;
            }
            enc = ArithmeticEncoder(&out);
            run_start = t + 1;
        }
    }

    if (!windowed) {
        enc.finish();
        code.consumed_bytes.push_back(doc.size());
    } else {
        if (run_bytes > 0) enc.finish();
        bool attributed = run_bytes == 0;
        auto take = [&] {
            std::uint64_t b = attributed ? 0 : run_bytes;
            attributed = true;
            return b;
        };
        while (out.size_bits() >= win_start + tau) {
            code.consumed_bytes.push_back(take());
            win_start += tau;
        }
        if (out.size_bits() > win_start) code.consumed_bytes.push_back(take());
    }
    code.bits = out.take();
    return code;
}

// Inverse of ac_encode given the same model and the source byte length.
// Needs no per-window bookkeeping from the encoder: the decoder replays the
// encoder's renormalization shifts, so window cut points and per-run code
// lengths are re-derived on the fly. Decoding with a different model or a
// wrong byte_len raises or returns garbage flagged by the final length check.
template <class Model>
std::string ac_decode(const WindowedCode& code, const Model& model, std::uint64_t byte_len) {
    if (byte_len == 0) throw UsageError("cannot decode to an empty document");
    const bool windowed = code.tau.has_value();
    const std::uint64_t tau = windowed ? *code.tau : 0;

    std::string out;
    out.reserve(byte_len);
    std::uint64_t code_pos = 0;  // bit offset where the current run's code starts
    std::uint64_t win_start = 0;

    while (out.size() < byte_len) {
        BitReader reader(code.bits, code_pos);
        ArithmeticDecoder dec(&reader);
        std::size_t run_start = out.size();
        for (;;) {
            ByteFreqs fr = model.next_frequencies(std::string_view(out).substr(run_start));
            out.push_back(static_cast<char>(dec.decode_byte(fr)));
            if (out.size() == byte_len) {
                if (code_pos + dec.shifts() + 2 != code.total_bits())
                    throw DataError("arithmetic decode: code length mismatch (wrong model, length, or corrupt code)");
                return out;
            }
            if (windowed && code_pos + dec.materialized_bits() >= win_start + tau) {
                code_pos += dec.shifts() + 2;
                win_start += tau;
                while (code_pos >= win_start + tau) win_start += tau;
                break;
            }
        }
    }
    return out;
}

struct PackedSymbols {
    std::vector<std::uint32_t> symbols;  // local ids in [0, 2^N)
    std::uint64_t total_bits = 0;
};

// Consecutive N-bit big-endian chunks become one symbol each; the final
// partial chunk is zero-padded on the right. total_bits lets unpack_bits
// strip the padding again.
inline PackedSymbols pack_bits(const BitVec& bits, PackingConfig p) {
    PackedSymbols out;
    out.total_bits = bits.nbits;
    const std::uint32_t n = p.bits_per_symbol;
    out.symbols.reserve((bits.nbits + n - 1) / n);
    for (std::uint64_t start = 0; start < bits.nbits; start += n) {
        std::uint32_t v = 0;
        for (std::uint32_t i = 0; i < n; ++i) {
            std::uint64_t idx = start + i;
            int bit = idx < bits.nbits ? bits.bit(idx) : 0;
            v = (v << 1) | static_cast<std::uint32_t>(bit);
        }
        out.symbols.push_back(v);
    }
    return out;
}

inline PackedSymbols pack_bits(const WindowedCode& code, PackingConfig p) { return pack_bits(code.bits, p); }

inline BitVec unpack_bits(std::span<const std::uint32_t> symbols, std::uint64_t total_bits, PackingConfig p) {
    const std::uint32_t n = p.bits_per_symbol;
    if ((total_bits + n - 1) / n != symbols.size())
        throw DataError("unpack_bits: total_bits inconsistent with symbol count");
    BitWriter out;
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        if (symbols[s] >= (1u << n)) throw DataError("unpack_bits: symbol outside packed alphabet");
        std::uint64_t remaining = total_bits - static_cast<std::uint64_t>(s) * n;
        auto take = static_cast<std::uint32_t>(std::min<std::uint64_t>(n, remaining));
        out.push_bits(symbols[s] >> (n - take), static_cast<int>(take));
    }
    return out.take();
}

}  // namespace pxmix

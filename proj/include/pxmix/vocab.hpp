#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "pxmix/util.hpp"

namespace pxmix {

using SymbolId = std::uint32_t;

// Unified symbol space shared by raw bytes and every compressor:
//   [0, 64)        sentinels (64 slots reserved, 5 assigned)
//   [64, 320)      raw byte values
//   [320, 320+V)   compressed symbols, V depends on the compressor
inline constexpr SymbolId kSentinelCount = 64;
inline constexpr SymbolId kByteBase = 64;
inline constexpr SymbolId kCompBase = 320;

enum class Sentinel : SymbolId {
    RawOpen = 0,
    RawClose = 1,
    CompOpen = 2,
    CompClose = 3,
    DocSep = 4,
    // ids 5..63 reserved
};

inline constexpr SymbolId id_of(Sentinel s) { return static_cast<SymbolId>(s); }

inline constexpr std::array<std::pair<std::string_view, Sentinel>, 5> kSentinelNames = {{
    {"raw_open", Sentinel::RawOpen},
    {"raw_close", Sentinel::RawClose},
    {"comp_open", Sentinel::CompOpen},
    {"comp_close", Sentinel::CompClose},
    {"doc_sep", Sentinel::DocSep},
}};

enum class SymbolClass { Sentinel, Byte, Compressed };

struct VocabLayout {
    SymbolId comp_vocab_size = 0;

    static VocabLayout layout_for(SymbolId comp_vocab_size) { return VocabLayout{comp_vocab_size}; }

    SymbolId byte_base() const { return kByteBase; }
    SymbolId comp_base() const { return kCompBase; }
    SymbolId total_size() const { return kCompBase + comp_vocab_size; }

    SymbolClass classify(SymbolId id) const {
        if (id < kByteBase) return SymbolClass::Sentinel;
        if (id < kCompBase) return SymbolClass::Byte;
        if (id < total_size()) return SymbolClass::Compressed;
        throw DataError("symbol id " + std::to_string(id) + " outside vocabulary of size " + std::to_string(total_size()));
    }

    SymbolId comp_to_symbol(SymbolId local) const {
        if (local >= comp_vocab_size) throw DataError("compressed symbol " + std::to_string(local) + " outside local alphabet");
        return kCompBase + local;
    }

    SymbolId symbol_to_comp(SymbolId id) const {
        if (id < kCompBase || id >= total_size()) throw DataError("symbol id " + std::to_string(id) + " is not a compressed symbol");
        return id - kCompBase;
    }

    std::uint64_t fingerprint() const {
        std::string blob;
        put_le<std::uint32_t>(blob, kSentinelCount);
        put_le<std::uint32_t>(blob, kByteBase);
        put_le<std::uint32_t>(blob, kCompBase);
        put_le<std::uint32_t>(blob, comp_vocab_size);
        return fnv1a64(blob);
    }
};

inline constexpr SymbolId byte_to_symbol(std::uint8_t b) { return kByteBase + b; }

inline std::uint8_t symbol_to_byte(SymbolId id) {
    if (id < kByteBase || id >= kCompBase) throw DataError("symbol id " + std::to_string(id) + " is not a byte symbol");
    return static_cast<std::uint8_t>(id - kByteBase);
}

}  // namespace pxmix

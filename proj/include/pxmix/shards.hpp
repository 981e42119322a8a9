#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pxmix/mixer.hpp"
#include "pxmix/util.hpp"
#include "pxmix/vocab.hpp"

namespace pxmix {

inline constexpr char kShardMagic[4] = {'P', 'X', 'M', 'X'};
inline constexpr std::uint32_t kShardVersion = 1;

// Packed binary shard: magic "PXMX", u32 version, u32 context_len,
// u64 layout fingerprint, u64 context count, then each context as
// context_len little-endian u32 symbols.
inline void write_shard(const std::string& path, std::uint32_t context_len, const VocabLayout& layout,
                        const std::vector<PackedContext>& contexts) {
    std::string out;
    out.append(kShardMagic, 4);
    put_le<std::uint32_t>(out, kShardVersion);
    put_le<std::uint32_t>(out, context_len);
    put_le<std::uint64_t>(out, layout.fingerprint());
    put_le<std::uint64_t>(out, contexts.size());
    for (const PackedContext& ctx : contexts) {
        if (ctx.symbols.size() != context_len) throw DataError("context size does not match shard context_len");
        for (SymbolId s : ctx.symbols) put_le<std::uint32_t>(out, s);
    }
    write_file(path, out);
}

struct ShardContents {
    std::uint32_t context_len = 0;
    std::uint64_t layout_fingerprint = 0;
    std::vector<std::vector<SymbolId>> contexts;
};

inline ShardContents read_shard(const std::string& path) {
    std::string blob = read_file(path);
    auto fail = [&](std::size_t offset, const std::string& what) {
        throw DataError("corrupt shard " + path + " at byte " + std::to_string(offset) + ": " + what);
    };
    if (blob.size() < 4 || blob.compare(0, 4, kShardMagic, 4) != 0) fail(0, "bad magic");
    std::size_t pos = 4;
    ShardContents out;
    try {
        auto version = get_le<std::uint32_t>(blob, pos);
        if (version != kShardVersion) fail(4, "unsupported version " + std::to_string(version));
        out.context_len = get_le<std::uint32_t>(blob, pos);
        out.layout_fingerprint = get_le<std::uint64_t>(blob, pos);
        auto n = get_le<std::uint64_t>(blob, pos);
        out.contexts.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            std::vector<SymbolId> ctx;
            ctx.reserve(out.context_len);
            for (std::uint32_t j = 0; j < out.context_len; ++j) ctx.push_back(get_le<std::uint32_t>(blob, pos));
            out.contexts.push_back(std::move(ctx));
        }
    } catch (const DataError&) {
        fail(pos, "truncated");
    }
    if (pos != blob.size()) fail(pos, "trailing bytes");
    return out;
}

inline nlohmann::json span_to_json(const PackedContext::Span& s) {
    nlohmann::json j;
    j["start"] = s.start;
    j["end"] = s.end;
    j["doc_id"] = s.doc_id;
    j["kind"] = std::string(view_kind_name(s.kind));
    j["continued"] = s.continued;
    return j;
}

inline PackedContext::Span span_from_json(const nlohmann::json& j) {
    PackedContext::Span s;
    s.start = j.at("start").get<std::uint32_t>();
    s.end = j.at("end").get<std::uint32_t>();
    s.doc_id = j.at("doc_id").get<std::string>();
    s.kind = view_kind_from_name(j.at("kind").get<std::string>());
    s.continued = j.at("continued").get<bool>();
    return s;
}

// Sidecar: one JSONL record per context with its fill and boundary spans.
inline void write_boundary_sidecar(const std::string& path, const std::vector<PackedContext>& contexts) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw UsageError("cannot write boundary sidecar: " + path);
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        nlohmann::json j;
        j["context"] = i;
        j["fill"] = contexts[i].fill;
        auto& spans = j["spans"] = nlohmann::json::array();
        for (const auto& s : contexts[i].spans) spans.push_back(span_to_json(s));
        f << j.dump() << "\n";
    }
    if (!f) throw DataError("short write: " + path);
}

struct BoundaryRecord {
    std::uint64_t context = 0;
    std::uint32_t fill = 0;
    std::vector<PackedContext::Span> spans;
};

inline std::vector<BoundaryRecord> read_boundary_sidecar(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open boundary sidecar: " + path);
    std::vector<BoundaryRecord> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        BoundaryRecord r;
        r.context = j.at("context").get<std::uint64_t>();
        r.fill = j.at("fill").get<std::uint32_t>();
        for (const auto& s : j.at("spans")) r.spans.push_back(span_from_json(s));
        out.push_back(std::move(r));
    }
    return out;
}

inline nlohmann::json layout_to_json(const VocabLayout& layout) {
    nlohmann::json sentinels;
    for (auto [name, s] : kSentinelNames) sentinels[std::string(name)] = id_of(s);
    nlohmann::json j;
    j["sentinels"] = sentinels;
    j["byte_base"] = layout.byte_base();
    j["comp_base"] = layout.comp_base();
    j["comp_vocab_size"] = layout.comp_vocab_size;
    return j;
}

inline VocabLayout layout_from_json(const nlohmann::json& j) {
    VocabLayout layout = VocabLayout::layout_for(j.at("comp_vocab_size").get<SymbolId>());
    if (j.at("byte_base").get<SymbolId>() != layout.byte_base() || j.at("comp_base").get<SymbolId>() != layout.comp_base())
        throw DataError("manifest layout does not match the fixed vocabulary bases");
    return layout;
}

}  // namespace pxmix

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <openssl/evp.h>

#include "pxmix/util.hpp"

namespace pxmix {

inline std::array<std::uint8_t, 32> sha256_digest(std::string_view data) {
    std::array<std::uint8_t, 32> out{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, out.data(), &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw DataError("sha256 digest failed");
    }
    EVP_MD_CTX_free(ctx);
    return out;
}

inline std::string sha256_hex(std::string_view data) {
    auto d = sha256_digest(data);
    return to_hex(std::string_view(reinterpret_cast<const char*>(d.data()), d.size()));
}

// Content-addressed store for compressed segments. Keys cover the segment
// bytes plus a model/config fingerprint, so a hit is always semantically
// safe: it returns bit-identical output to recompressing the segment.
class SegmentCache {
  public:
    struct Entry {
        std::vector<std::uint32_t> symbols;
        std::uint64_t total_bits = 0;
    };

    static std::array<std::uint8_t, 32> key(std::string_view segment, std::uint64_t config_fingerprint) {
        std::string blob;
        put_le<std::uint64_t>(blob, config_fingerprint);
        blob.append(segment);
        return sha256_digest(blob);
    }

    std::optional<Entry> lookup(const std::array<std::uint8_t, 32>& k) const {
        std::shared_lock lock(mu_);
        auto it = map_.find(pack_key(k));
        if (it == map_.end()) {
            ++misses_;
            return std::nullopt;
        }
        ++hits_;
        return it->second;
    }

    void insert(const std::array<std::uint8_t, 32>& k, Entry entry) {
        std::unique_lock lock(mu_);
        map_.emplace(pack_key(k), std::move(entry));
    }

    std::uint64_t hits() const { return hits_.load(); }
    std::uint64_t misses() const { return misses_.load(); }
    std::size_t size() const {
        std::shared_lock lock(mu_);
        return map_.size();
    }
    void reset_counters() {
        hits_ = 0;
        misses_ = 0;
    }

    // Record stream: 32-byte key, u64 total_bits, u32 symbol count, u32
    // symbols (little-endian). save() writes records sorted by key so the
    // file is reproducible; load() accepts any record order and appended
    // duplicates (last record wins, duplicates are bit-identical anyway).
    std::string serialize() const {
        std::shared_lock lock(mu_);
        std::vector<const std::pair<const std::string, Entry>*> rows;
        rows.reserve(map_.size());
        for (const auto& kv : map_) rows.push_back(&kv);
        std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
        std::string out = "PXSC";
        put_le<std::uint32_t>(out, 1);
        for (const auto* row : rows) {
            out.append(row->first);
            put_le<std::uint64_t>(out, row->second.total_bits);
            put_le<std::uint32_t>(out, static_cast<std::uint32_t>(row->second.symbols.size()));
            for (std::uint32_t s : row->second.symbols) put_le<std::uint32_t>(out, s);
        }
        return out;
    }

    void save(const std::string& path) const { write_file(path, serialize()); }

    // Merges the records from `path` into this cache.
    void load_file(const std::string& path) {
        std::string blob = read_file(path);
        if (blob.substr(0, 4) != "PXSC") throw DataError("segment cache file: bad magic");
        std::size_t pos = 4;
        auto version = get_le<std::uint32_t>(blob, pos);
        if (version != 1) throw DataError("segment cache file: unsupported version");
        std::unique_lock lock(mu_);
        while (pos < blob.size()) {
            if (pos + 32 > blob.size()) throw DataError("segment cache file: truncated key");
            std::string key(blob.substr(pos, 32));
            pos += 32;
            Entry e;
            e.total_bits = get_le<std::uint64_t>(blob, pos);
            auto n = get_le<std::uint32_t>(blob, pos);
            e.symbols.reserve(n);
            for (std::uint32_t i = 0; i < n; ++i) e.symbols.push_back(get_le<std::uint32_t>(blob, pos));
            map_[std::move(key)] = std::move(e);
        }
    }

  private:
    static std::string pack_key(const std::array<std::uint8_t, 32>& k) {
        return std::string(reinterpret_cast<const char*>(k.data()), k.size());
    }

    mutable std::shared_mutex mu_;
    std::unordered_map<std::string, Entry> map_;
    mutable std::atomic<std::uint64_t> hits_{0};
    mutable std::atomic<std::uint64_t> misses_{0};
};

}  // namespace pxmix

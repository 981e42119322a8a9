#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pxmix/arith.hpp"
#include "pxmix/util.hpp"

namespace pxmix {

// Smoothing constant as an exact rational, so conditional probabilities are
// exact integer ratios and the arithmetic coder sees the same numbers the
// entropy profile reports.
struct Rational {
    std::uint64_t num = 1;
    std::uint64_t den = 10;

    static Rational from_double(double a) {
        if (!(a > 0)) throw UsageError("smoothing constant must be > 0");
        std::uint64_t den = 1;
        for (int i = 0; i <= 6; ++i, den *= 10) {
            double scaled = a * static_cast<double>(den);
            auto num = static_cast<std::uint64_t>(std::llround(scaled));
            if (num >= 1 && std::abs(scaled - static_cast<double>(num)) < 1e-9) return Rational{num, den};
        }
        throw UsageError("smoothing constant must be a decimal with at most 6 fractional digits");
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Order-k adaptive byte model: add-alpha smoothed frequency tables over
// contexts of length 0..k, backing off to the longest context that has been
// observed. Deterministic given (corpus order, k, alpha); immutable once
// fitted. This is the probability source for the neural proxy compressor.
class ByteModel {
  public:
    ByteModel() : ByteModel(4, Rational{1, 10}) {}

    ByteModel(int order, Rational alpha) : order_(order), alpha_(alpha), tables_(static_cast<std::size_t>(order) + 1) {
        if (order < 0) throw UsageError("model order must be >= 0");
        if (alpha.num == 0 || alpha.den == 0) throw UsageError("smoothing constant must be > 0");
    }

    static ByteModel fit(std::span<const std::string> corpus, int order, Rational alpha) {
        if (corpus.empty()) throw UsageError("cannot fit byte model on an empty corpus");
        ByteModel m(order, alpha);
        for (const std::string& doc : corpus) m.observe(doc);
        return m;
    }

    void observe(std::string_view doc) {
        for (std::size_t t = 0; t < doc.size(); ++t) {
            int max_j = static_cast<int>(std::min<std::size_t>(order_, t));
            for (int j = 0; j <= max_j; ++j) {
                std::string ctx(doc.substr(t - j, j));
                Table& tab = tables_[j][std::move(ctx)];
                tab.add(static_cast<std::uint8_t>(doc[t]));
            }
        }
        fingerprint_cache_ = 0;
    }

    int order() const { return order_; }
    Rational alpha() const { return alpha_; }

    // Exact integer frequencies for the next byte after `context`; contexts
    // longer than the model order are truncated to their last k bytes.
    ByteFreqs next_frequencies(std::string_view context) const {
        if (context.size() > static_cast<std::size_t>(order_)) context = context.substr(context.size() - order_);
        const Table* tab = backoff(context);
        ByteFreqs fr;
        if (tab == nullptr) {
            fr.f.fill(alpha_.num);
            fr.total = 256 * alpha_.num;
            return fr;
        }
        fr.f.fill(alpha_.num);
        for (const auto& [b, c] : tab->entries) fr.f[b] += alpha_.den * static_cast<std::uint64_t>(c);
        fr.total = alpha_.den * tab->total + 256 * alpha_.num;
        if (fr.total > ac::kMaxTotal) throw DataError("context frequency total exceeds coder capacity");
        return fr;
    }

    std::array<double, 256> next_distribution(std::string_view context) const {
        ByteFreqs fr = next_frequencies(context);
        std::array<double, 256> p{};
        for (int i = 0; i < 256; ++i) p[i] = static_cast<double>(fr.f[i]) / static_cast<double>(fr.total);
        return p;
    }

    // Per-byte cross-entropy h_t = -log2 P(doc_t | doc_{<t}), in bits.
    std::vector<double> entropy_profile(std::string_view doc) const {
        if (doc.empty()) throw UsageError("entropy profile of an empty document");
        std::vector<double> h;
        h.reserve(doc.size());
        for (std::size_t t = 0; t < doc.size(); ++t) {
            ByteFreqs fr = next_frequencies(doc.substr(0, t));
            auto b = static_cast<std::uint8_t>(doc[t]);
            h.push_back(-std::log2(static_cast<double>(fr.f[b]) / static_cast<double>(fr.total)));
        }
        return h;
    }

    // Versioned little-endian binary format; table iteration is sorted so the
    // bytes are identical across platforms and runs.
    std::string serialize() const {
        std::string out = "PXBM";
        put_le<std::uint32_t>(out, 1);
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(order_));
        put_le<std::uint64_t>(out, alpha_.num);
        put_le<std::uint64_t>(out, alpha_.den);
        for (int j = 0; j <= order_; ++j) {
            std::map<std::string, const Table*> sorted;
            for (const auto& [ctx, tab] : tables_[j]) sorted.emplace(ctx, &tab);
            put_le<std::uint64_t>(out, sorted.size());
            for (const auto& [ctx, tab] : sorted) {
                out.append(ctx);
                put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tab->entries.size()));
                for (const auto& [b, c] : tab->entries) {
                    out.push_back(static_cast<char>(b));
                    put_le<std::uint64_t>(out, c);
                }
            }
        }
        return out;
    }

    static ByteModel deserialize(std::string_view blob) {
        std::size_t pos = 0;
        if (blob.substr(0, 4) != "PXBM") throw DataError("byte model file: bad magic");
        pos = 4;
        auto version = get_le<std::uint32_t>(blob, pos);
        if (version != 1) throw DataError("byte model file: unsupported version " + std::to_string(version));
        auto order = get_le<std::uint32_t>(blob, pos);
        auto num = get_le<std::uint64_t>(blob, pos);
        auto den = get_le<std::uint64_t>(blob, pos);
        ByteModel m(static_cast<int>(order), Rational{num, den});
        for (std::uint32_t j = 0; j <= order; ++j) {
            auto n_tables = get_le<std::uint64_t>(blob, pos);
            for (std::uint64_t i = 0; i < n_tables; ++i) {
                if (pos + j > blob.size()) throw DataError("byte model file: truncated context");
                std::string ctx(blob.substr(pos, j));
                pos += j;
                auto n_entries = get_le<std::uint32_t>(blob, pos);
                Table tab;
                for (std::uint32_t e = 0; e < n_entries; ++e) {
                    if (pos >= blob.size()) throw DataError("byte model file: truncated entry");
                    auto b = static_cast<std::uint8_t>(blob[pos++]);
                    auto c = get_le<std::uint64_t>(blob, pos);
                    tab.entries.emplace_back(b, c);
                    tab.total += c;
                }
                m.tables_[j].emplace(std::move(ctx), std::move(tab));
            }
        }
        if (pos != blob.size()) throw DataError("byte model file: trailing bytes");
        return m;
    }

    void save(const std::string& path) const { write_file(path, serialize()); }

    static ByteModel load(const std::string& path) { return deserialize(read_file(path)); }

    std::uint64_t fingerprint() const {
        if (fingerprint_cache_ == 0) fingerprint_cache_ = fnv1a64(serialize());
        return fingerprint_cache_;
    }

  private:
    struct Table {
        // sparse (byte, count) pairs sorted by byte
        std::vector<std::pair<std::uint8_t, std::uint64_t>> entries;
        std::uint64_t total = 0;

        void add(std::uint8_t b) {
            auto it = std::lower_bound(entries.begin(), entries.end(), b,
                                       [](const auto& e, std::uint8_t key) { return e.first < key; });
            if (it != entries.end() && it->first == b) {
                ++it->second;
            } else {
                entries.insert(it, {b, 1});
            }
            ++total;
        }
    };

    const Table* backoff(std::string_view context) const {
        for (std::size_t j = context.size() + 1; j-- > 0;) {
            const auto& level = tables_[j];
            if (level.empty()) continue;
            auto it = level.find(std::string(context.substr(context.size() - j)));
            if (it != level.end()) return &it->second;
        }
        return nullptr;
    }

    int order_;
    Rational alpha_;
    std::vector<std::unordered_map<std::string, Table>> tables_;
    mutable std::uint64_t fingerprint_cache_ = 0;
};

}  // namespace pxmix

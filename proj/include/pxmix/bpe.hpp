#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "pxmix/util.hpp"

namespace pxmix {

enum class Pretokenizer { DefaultRegex, LineSeparated };

inline std::string_view pretokenizer_name(Pretokenizer p) {
    return p == Pretokenizer::DefaultRegex ? "default" : "line";
}

inline Pretokenizer pretokenizer_from_name(std::string_view name) {
    if (name == "default") return Pretokenizer::DefaultRegex;
    if (name == "line") return Pretokenizer::LineSeparated;
    throw UsageError("unknown pretokenizer: " + std::string(name));
}

// Default pretokenization: maximal runs of [A-Za-z0-9_], maximal runs of
// whitespace, and single other bytes. Line pretokenization: whole lines
// including the trailing newline. Merges never cross pretoken boundaries.
inline std::vector<std::string_view> pretokenize(std::string_view doc, Pretokenizer p) {
    std::vector<std::string_view> out;
    if (p == Pretokenizer::LineSeparated) {
        std::size_t start = 0;
        for (std::size_t i = 0; i < doc.size(); ++i) {
            if (doc[i] == '\n') {
                out.push_back(doc.substr(start, i + 1 - start));
                start = i + 1;
            }
        }
        if (start < doc.size()) out.push_back(doc.substr(start));
        return out;
    }
    auto is_word = [](unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_'; };
    auto is_space = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    std::size_t i = 0;
    while (i < doc.size()) {
        std::size_t start = i;
        auto c = static_cast<unsigned char>(doc[i]);
        if (is_word(c)) {
            while (i < doc.size() && is_word(static_cast<unsigned char>(doc[i]))) ++i;
        } else if (is_space(c)) {
            while (i < doc.size() && is_space(static_cast<unsigned char>(doc[i]))) ++i;
        } else {
            ++i;
        }
        out.push_back(doc.substr(start, i - start));
    }
    return out;
}

// Byte-level BPE: ids [0, 256) are the single bytes, merged tokens follow in
// training order. Encoding then concatenating token byte strings reproduces
// the input exactly.
class BpeTokenizer {
  public:
    using TokenId = std::uint32_t;

    BpeTokenizer() : BpeTokenizer(Pretokenizer::DefaultRegex) {}

    explicit BpeTokenizer(Pretokenizer p) : pretok_(p) {
        vocab_.reserve(256);
        for (int b = 0; b < 256; ++b) vocab_.push_back(std::string(1, static_cast<char>(b)));
    }

    std::size_t vocab_size() const { return vocab_.size(); }
    const std::string& token_bytes(TokenId id) const {
        if (id >= vocab_.size()) throw DataError("token id out of range");
        return vocab_[id];
    }
    Pretokenizer pretokenizer() const { return pretok_; }
    const std::vector<std::pair<TokenId, TokenId>>& merges() const { return merges_; }

    void add_merge(TokenId a, TokenId b) {
        if (a >= vocab_.size() || b >= vocab_.size()) throw DataError("merge references unknown token");
        merge_rank_[pair_key(a, b)] = merges_.size();
        merges_.emplace_back(a, b);
        vocab_.push_back(vocab_[a] + vocab_[b]);
    }

    std::vector<TokenId> encode(std::string_view doc) const {
        std::vector<TokenId> out;
        for (std::string_view pre : pretokenize(doc, pretok_)) encode_pretoken(pre, out);
        return out;
    }

    std::string decode(std::span<const TokenId> ids) const {
        std::string out;
        for (TokenId id : ids) out += token_bytes(id);
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        auto& vocab = j["vocab"] = nlohmann::json::array();
        for (const std::string& t : vocab_) vocab.push_back(to_hex(t));
        auto& merges = j["merges"] = nlohmann::json::array();
        for (auto [a, b] : merges_) merges.push_back({a, b});
        j["pretokenizer"] = pretokenizer_name(pretok_);
        return j;
    }

    static BpeTokenizer from_json(const nlohmann::json& j) {
        BpeTokenizer tok(pretokenizer_from_name(j.at("pretokenizer").get<std::string>()));
        const auto& vocab = j.at("vocab");
        for (std::size_t i = 0; i < 256 && i < vocab.size(); ++i) {
            if (from_hex(vocab[i].get<std::string>()) != tok.vocab_[i]) throw DataError("tokenizer file: byte vocabulary mismatch");
        }
        for (const auto& m : j.at("merges")) tok.add_merge(m.at(0).get<TokenId>(), m.at(1).get<TokenId>());
        if (tok.vocab_.size() != vocab.size()) throw DataError("tokenizer file: vocab/merges size mismatch");
        for (std::size_t i = 256; i < vocab.size(); ++i) {
            if (from_hex(vocab[i].get<std::string>()) != tok.vocab_[i]) throw DataError("tokenizer file: merged token mismatch");
        }
        return tok;
    }

    void save(const std::string& path) const { write_file(path, to_json().dump(2) + "\n"); }

    static BpeTokenizer load(const std::string& path) {
        return from_json(nlohmann::json::parse(read_file(path)));
    }

  private:
    static std::uint64_t pair_key(TokenId a, TokenId b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

    // Standard rank-greedy inference: repeatedly apply the earliest-trained
    // merge present in the sequence until none applies.
    void encode_pretoken(std::string_view pre, std::vector<TokenId>& out) const {
        std::vector<TokenId> ids;
        ids.reserve(pre.size());
        for (unsigned char c : pre) ids.push_back(c);
        while (ids.size() >= 2) {
            std::size_t best_rank = merges_.size();
            for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
                auto it = merge_rank_.find(pair_key(ids[i], ids[i + 1]));
                if (it != merge_rank_.end() && it->second < best_rank) best_rank = it->second;
            }
            if (best_rank == merges_.size()) break;
            auto [a, b] = merges_[best_rank];
            TokenId merged = static_cast<TokenId>(256 + best_rank);
            std::vector<TokenId> next;
            next.reserve(ids.size());
            for (std::size_t i = 0; i < ids.size();) {
                if (i + 1 < ids.size() && ids[i] == a && ids[i + 1] == b) {
                    next.push_back(merged);
                    i += 2;
                } else {
                    next.push_back(ids[i]);
                    ++i;
                }
            }
            ids = std::move(next);
        }
        out.insert(out.end(), ids.begin(), ids.end());
    }

    std::vector<std::string> vocab_;
    std::vector<std::pair<TokenId, TokenId>> merges_;
    std::unordered_map<std::uint64_t, std::size_t> merge_rank_;
    Pretokenizer pretok_;
};

struct BpeTrainStats {
    std::size_t requested_vocab = 0;
    std::size_t reached_vocab = 0;
    bool stopped_early = false;
};

// Trains byte-level BPE: count adjacent pairs inside pretokens, merge the
// most frequent one, repeat until the target vocabulary is reached. A merge
// needs count >= 2; when no pair qualifies, training stops early and the
// reached size is recorded. Ties break on the lexicographically smallest
// (left bytes, right bytes) pair so training is deterministic.
inline BpeTokenizer bpe_train(std::span<const std::string> corpus, std::size_t target_vocab, Pretokenizer pretok,
                              BpeTrainStats* stats = nullptr) {
    if (target_vocab <= 256) throw UsageError("BPE target vocabulary must exceed 256");
    using TokenId = BpeTokenizer::TokenId;
    BpeTokenizer tok(pretok);

    // unique pretokens with multiplicities, as id sequences
    std::unordered_map<std::string, std::uint64_t> pretoken_counts;
    for (const std::string& doc : corpus)
        for (std::string_view pre : pretokenize(doc, pretok)) ++pretoken_counts[std::string(pre)];
    struct Word {
        std::vector<TokenId> ids;
        std::uint64_t count;
    };
    std::vector<Word> words;
    words.reserve(pretoken_counts.size());
    for (const auto& [pre, count] : pretoken_counts) {
        Word w;
        w.count = count;
        w.ids.reserve(pre.size());
        for (unsigned char c : pre) w.ids.push_back(c);
        words.push_back(std::move(w));
    }

    bool stopped_early = false;
    while (tok.vocab_size() < target_vocab) {
        std::unordered_map<std::uint64_t, std::uint64_t> pair_counts;
        for (const Word& w : words)
            for (std::size_t i = 0; i + 1 < w.ids.size(); ++i)
                pair_counts[(static_cast<std::uint64_t>(w.ids[i]) << 32) | w.ids[i + 1]] += w.count;

        std::uint64_t best_key = 0;
        std::uint64_t best_count = 0;
        for (const auto& [key, count] : pair_counts) {
            if (count < best_count) continue;
            if (count > best_count) {
                best_count = count;
                best_key = key;
                continue;
            }
            auto ab = [&](std::uint64_t k) {
                return std::make_pair(tok.token_bytes(static_cast<TokenId>(k >> 32)), tok.token_bytes(static_cast<TokenId>(k & 0xffffffff)));
            };
            if (ab(key) < ab(best_key)) best_key = key;
        }
        if (best_count < 2) {
            stopped_early = true;
            break;
        }

        auto a = static_cast<TokenId>(best_key >> 32);
        auto b = static_cast<TokenId>(best_key & 0xffffffff);
        auto merged = static_cast<TokenId>(tok.vocab_size());
        tok.add_merge(a, b);
        for (Word& w : words) {
            if (w.ids.size() < 2) continue;
            std::vector<TokenId> next;
            next.reserve(w.ids.size());
            for (std::size_t i = 0; i < w.ids.size();) {
                if (i + 1 < w.ids.size() && w.ids[i] == a && w.ids[i + 1] == b) {
                    next.push_back(merged);
                    i += 2;
                } else {
                    next.push_back(w.ids[i]);
                    ++i;
                }
            }
            w.ids = std::move(next);
        }
    }
    if (stats != nullptr) *stats = {target_vocab, tok.vocab_size(), stopped_early};
    return tok;
}

}  // namespace pxmix

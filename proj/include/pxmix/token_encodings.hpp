#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "pxmix/bpe.hpp"
#include "pxmix/util.hpp"

namespace pxmix {

enum class TokenEncoding { TokenIndex, FixedBytes, HuffmanBytes, GrayBytes };

inline std::string_view token_encoding_name(TokenEncoding e) {
    switch (e) {
        case TokenEncoding::TokenIndex: return "token-index";
        case TokenEncoding::FixedBytes: return "fixed-bytes";
        case TokenEncoding::HuffmanBytes: return "huffman-bytes";
        case TokenEncoding::GrayBytes: return "gray-bytes";
    }
    throw UsageError("unknown token encoding");
}

inline TokenEncoding token_encoding_from_name(std::string_view name) {
    if (name == "token-index") return TokenEncoding::TokenIndex;
    if (name == "fixed-bytes") return TokenEncoding::FixedBytes;
    if (name == "huffman-bytes") return TokenEncoding::HuffmanBytes;
    if (name == "gray-bytes") return TokenEncoding::GrayBytes;
    throw UsageError("unknown token encoding: " + std::string(name));
}

// Smallest B with 256^B >= V.
inline std::uint32_t fixed_bytes_per_token(std::uint64_t vocab_size) {
    if (vocab_size < 2) throw UsageError("token alphabet must have at least 2 entries");
    std::uint32_t b = 1;
    std::uint64_t capacity = 256;
    while (capacity < vocab_size) {
        capacity *= 256;
        ++b;
    }
    return b;
}

inline std::uint32_t to_gray(std::uint32_t r) { return r ^ (r >> 1); }

inline std::uint32_t from_gray(std::uint32_t g) {
    g ^= g >> 16;
    g ^= g >> 8;
    g ^= g >> 4;
    g ^= g >> 2;
    g ^= g >> 1;
    return g;
}

// Byte-aligned prefix-free codebook: a 256-ary Huffman tree (one byte per
// edge) over token frequencies, emitted as canonical codes ordered by
// (length, token id). Tokens with zero frequency get no code. Satisfies the
// 256-ary Kraft-McMillan inequality by construction.
class ByteHuffman {
  public:
    static ByteHuffman build(std::span<const std::uint64_t> freqs) {
        if (freqs.empty()) throw UsageError("huffman: empty frequency table");
        std::vector<std::uint32_t> coded;
        for (std::uint32_t i = 0; i < freqs.size(); ++i)
            if (freqs[i] > 0) coded.push_back(i);
        if (coded.empty()) throw UsageError("huffman: all frequencies are zero");

        ByteHuffman h;
        h.lengths_.assign(freqs.size(), 0);
        if (coded.size() == 1) {
            h.lengths_[coded[0]] = 1;
        } else {
            // pad with zero-weight dummies so every combine takes exactly 256
            std::size_t n = coded.size();
            std::size_t dummies = (255 - (n - 1) % 255) % 255;

            struct Node {
                std::uint64_t weight;
                std::uint64_t seq;  // creation order, makes the heap deterministic
                std::int64_t token;  // >= 0 leaf, -1 internal
                std::vector<std::size_t> children;
            };
            std::vector<Node> nodes;
            std::uint64_t seq = 0;
            for (std::uint32_t t : coded) nodes.push_back({freqs[t], seq++, t, {}});
            for (std::size_t d = 0; d < dummies; ++d) nodes.push_back({0, seq++, -2, {}});

            auto cmp = [&nodes](std::size_t a, std::size_t b) {
                if (nodes[a].weight != nodes[b].weight) return nodes[a].weight > nodes[b].weight;
                return nodes[a].seq > nodes[b].seq;
            };
            std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
            for (std::size_t i = 0; i < nodes.size(); ++i) heap.push(i);
            while (heap.size() > 1) {
                Node parent{0, seq++, -1, {}};
                for (int i = 0; i < 256 && !heap.empty(); ++i) {
                    std::size_t c = heap.top();
                    heap.pop();
                    parent.weight += nodes[c].weight;
                    parent.children.push_back(c);
                }
                nodes.push_back(std::move(parent));
                heap.push(nodes.size() - 1);
            }
            // depth-first length assignment from the root
            std::vector<std::pair<std::size_t, std::uint32_t>> stack{{heap.top(), 0}};
            while (!stack.empty()) {
                auto [idx, depth] = stack.back();
                stack.pop_back();
                const Node& node = nodes[idx];
                if (node.token >= 0) {
                    h.lengths_[static_cast<std::size_t>(node.token)] = depth;
                } else {
                    for (std::size_t c : node.children) stack.push_back({c, depth + 1});
                }
            }
        }
        h.assign_canonical();
        return h;
    }

    const std::string& code(std::uint32_t token) const {
        if (token >= codes_.size() || codes_[token].empty()) throw DataError("huffman: token has no code (zero training frequency)");
        return codes_[token];
    }

    bool has_code(std::uint32_t token) const { return token < codes_.size() && !codes_[token].empty(); }

    std::string encode(std::span<const std::uint32_t> tokens) const {
        std::string out;
        for (std::uint32_t t : tokens) out += code(t);
        return out;
    }

    std::vector<std::uint32_t> decode(std::string_view bytes) const {
        std::vector<std::uint32_t> out;
        std::size_t pos = 0;
        while (pos < bytes.size()) {
            std::size_t node = 0;
            for (;;) {
                if (pos >= bytes.size()) throw DataError("huffman: truncated code");
                node = trie_[node].next[static_cast<std::uint8_t>(bytes[pos++])];
                if (node == kNoEdge) throw DataError("huffman: invalid code byte");
                if (trie_[node].token >= 0) {
                    out.push_back(static_cast<std::uint32_t>(trie_[node].token));
                    break;
                }
            }
        }
        return out;
    }

    // sum of 256^-len over coded tokens
    double kraft_sum() const {
        double s = 0.0;
        for (std::uint32_t len : lengths_)
            if (len > 0) s += std::pow(256.0, -static_cast<double>(len));
        return s;
    }

    std::uint32_t code_length(std::uint32_t token) const { return token < lengths_.size() ? lengths_[token] : 0; }

  private:
    static constexpr std::size_t kNoEdge = static_cast<std::size_t>(-1);

    struct TrieNode {
        std::vector<std::size_t> next = std::vector<std::size_t>(256, kNoEdge);
        std::int64_t token = -1;
    };

    void assign_canonical() {
        std::vector<std::uint32_t> order;
        for (std::uint32_t t = 0; t < lengths_.size(); ++t)
            if (lengths_[t] > 0) order.push_back(t);
        std::sort(order.begin(), order.end(), [this](std::uint32_t a, std::uint32_t b) {
            if (lengths_[a] != lengths_[b]) return lengths_[a] < lengths_[b];
            return a < b;
        });
        codes_.assign(lengths_.size(), std::string());
        trie_.assign(1, TrieNode{});
        std::uint64_t next_value = 0;
        std::uint32_t prev_len = 0;
        for (std::uint32_t t : order) {
            std::uint32_t len = lengths_[t];
            next_value <<= 8 * (len - prev_len);
            std::string code(len, '\0');
            for (std::uint32_t i = 0; i < len; ++i) code[len - 1 - i] = static_cast<char>((next_value >> (8 * i)) & 0xff);
            codes_[t] = code;
            insert_trie(code, t);
            ++next_value;
            prev_len = len;
        }
    }

    void insert_trie(std::string_view code, std::uint32_t token) {
        std::size_t node = 0;
        for (char ch : code) {
            auto b = static_cast<std::uint8_t>(ch);
            if (trie_[node].next[b] == kNoEdge) {
                trie_[node].next[b] = trie_.size();
                trie_.emplace_back();
            }
            node = trie_[node].next[b];
        }
        trie_[node].token = token;
    }

    std::vector<std::uint32_t> lengths_;
    std::vector<std::string> codes_;
    std::vector<TrieNode> trie_;
};

// Lexicographic ranking of token surface forms used by the Gray encoding:
// adjacent ranks differ in exactly one bit of their Gray code, so tokens
// with similar byte surfaces get similar byte encodings.
class GrayRanking {
  public:
    explicit GrayRanking(const BpeTokenizer& tok) {
        auto v = static_cast<std::uint32_t>(tok.vocab_size());
        id_by_rank_.resize(v);
        std::iota(id_by_rank_.begin(), id_by_rank_.end(), 0u);
        std::sort(id_by_rank_.begin(), id_by_rank_.end(), [&tok](std::uint32_t a, std::uint32_t b) {
            const std::string& sa = tok.token_bytes(a);
            const std::string& sb = tok.token_bytes(b);
            if (sa != sb) return sa < sb;
            return a < b;
        });
        rank_by_id_.resize(v);
        for (std::uint32_t r = 0; r < v; ++r) rank_by_id_[id_by_rank_[r]] = r;
    }

    std::uint32_t rank_of(std::uint32_t id) const { return rank_by_id_.at(id); }
    std::uint32_t id_at(std::uint32_t rank) const {
        if (rank >= id_by_rank_.size()) throw DataError("gray decode: rank outside vocabulary");
        return id_by_rank_[rank];
    }
    std::uint32_t size() const { return static_cast<std::uint32_t>(id_by_rank_.size()); }

  private:
    std::vector<std::uint32_t> id_by_rank_;
    std::vector<std::uint32_t> rank_by_id_;
};

}  // namespace pxmix

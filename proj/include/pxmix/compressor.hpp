#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pxmix/bpe.hpp"
#include "pxmix/byte_model.hpp"
#include "pxmix/coder.hpp"
#include "pxmix/gzip.hpp"
#include "pxmix/segment_cache.hpp"
#include "pxmix/segmenter.hpp"
#include "pxmix/token_encodings.hpp"
#include "pxmix/util.hpp"

namespace pxmix {

// A proxy compressor maps a byte document to a sequence of local symbols in
// [0, comp_vocab_size). compress is deterministic; decompress is the exact
// inverse when the compressor is invertible and throws otherwise.
class ProxyCompressor {
  public:
    virtual ~ProxyCompressor() = default;
    virtual std::string_view name() const = 0;
    virtual std::uint32_t comp_vocab_size() const = 0;
    virtual bool invertible() const = 0;
    virtual std::vector<std::uint32_t> compress(std::string_view doc) const = 0;
    virtual std::string decompress(std::span<const std::uint32_t> symbols) const = 0;
};

// Local symbols are the document's own bytes. Used as a fixture in tests and
// as the degenerate "no compression" reference.
class IdentityCompressor final : public ProxyCompressor {
  public:
    std::string_view name() const override { return "identity"; }
    std::uint32_t comp_vocab_size() const override { return 256; }
    bool invertible() const override { return true; }

    std::vector<std::uint32_t> compress(std::string_view doc) const override {
        std::vector<std::uint32_t> out;
        out.reserve(doc.size());
        for (unsigned char c : doc) out.push_back(c);
        return out;
    }

    std::string decompress(std::span<const std::uint32_t> symbols) const override {
        std::string out;
        out.reserve(symbols.size());
        for (std::uint32_t s : symbols) {
            if (s > 255) throw DataError("identity: symbol outside byte alphabet");
            out.push_back(static_cast<char>(s));
        }
        return out;
    }
};

// Keeps one byte out of every `stride`; only the output length matters.
// Non-invertible throughput stand-in for mixer statistics tests.
class FixedRateCompressor final : public ProxyCompressor {
  public:
    explicit FixedRateCompressor(std::uint32_t stride) : stride_(stride) {
        if (stride < 1) throw UsageError("stride must be >= 1");
    }

    std::string_view name() const override { return "fixture-stride"; }
    std::uint32_t comp_vocab_size() const override { return 256; }
    bool invertible() const override { return false; }

    std::vector<std::uint32_t> compress(std::string_view doc) const override {
        std::vector<std::uint32_t> out;
        out.reserve(doc.size() / stride_ + 1);
        for (std::size_t i = 0; i < doc.size(); i += stride_) out.push_back(static_cast<unsigned char>(doc[i]));
        return out;
    }

    std::string decompress(std::span<const std::uint32_t>) const override {
        throw DataError("fixture-stride compressor is not invertible");
    }

  private:
    std::uint32_t stride_;
};

// BPE tokenizer behind one of the token->symbol encodings of the token-byte
// ablation family. Invertible for every encoding.
class TokenizerCompressor final : public ProxyCompressor {
  public:
    TokenizerCompressor(BpeTokenizer tok, TokenEncoding enc)
        : tok_(std::move(tok)), enc_(enc) {
        if (enc == TokenEncoding::HuffmanBytes)
            throw UsageError("huffman-bytes encoding needs token frequencies; use the frequency constructor");
        init();
    }

    TokenizerCompressor(BpeTokenizer tok, TokenEncoding enc, std::span<const std::uint64_t> token_freqs)
        : tok_(std::move(tok)), enc_(enc) {
        if (enc == TokenEncoding::HuffmanBytes) {
            if (token_freqs.size() != tok_.vocab_size()) throw UsageError("token frequency table size mismatch");
            huffman_ = ByteHuffman::build(token_freqs);
        }
        init();
    }

    std::string_view name() const override { return name_; }
    std::uint32_t comp_vocab_size() const override {
        return enc_ == TokenEncoding::TokenIndex ? static_cast<std::uint32_t>(tok_.vocab_size()) : 256;
    }
    bool invertible() const override { return true; }
    const BpeTokenizer& tokenizer() const { return tok_; }
    TokenEncoding encoding() const { return enc_; }
    std::uint32_t bytes_per_token() const { return bytes_per_token_; }

    std::vector<std::uint32_t> compress(std::string_view doc) const override {
        std::vector<BpeTokenizer::TokenId> ids = tok_.encode(doc);
        std::vector<std::uint32_t> out;
        switch (enc_) {
            case TokenEncoding::TokenIndex:
                out.assign(ids.begin(), ids.end());
                break;
            case TokenEncoding::FixedBytes:
                out.reserve(ids.size() * bytes_per_token_);
                for (std::uint32_t id : ids) push_be(out, id, bytes_per_token_);
                break;
            case TokenEncoding::GrayBytes:
                out.reserve(ids.size() * bytes_per_token_);
                for (std::uint32_t id : ids) push_be(out, to_gray(gray_->rank_of(id)), bytes_per_token_);
                break;
            case TokenEncoding::HuffmanBytes: {
                std::string bytes = huffman_->encode(ids);
                out.reserve(bytes.size());
                for (unsigned char c : bytes) out.push_back(c);
                break;
            }
        }
        return out;
    }

    std::string decompress(std::span<const std::uint32_t> symbols) const override {
        std::vector<BpeTokenizer::TokenId> ids;
        switch (enc_) {
            case TokenEncoding::TokenIndex:
                for (std::uint32_t s : symbols) {
                    if (s >= tok_.vocab_size()) throw DataError("token index outside vocabulary");
                    ids.push_back(s);
                }
                break;
            case TokenEncoding::FixedBytes:
                for (std::uint32_t v : regroup(symbols)) {
                    if (v >= tok_.vocab_size()) throw DataError("fixed-bytes value outside vocabulary");
                    ids.push_back(v);
                }
                break;
            case TokenEncoding::GrayBytes:
                for (std::uint32_t v : regroup(symbols)) ids.push_back(gray_->id_at(from_gray(v)));
                break;
            case TokenEncoding::HuffmanBytes: {
                std::string bytes;
                bytes.reserve(symbols.size());
                for (std::uint32_t s : symbols) {
                    if (s > 255) throw DataError("huffman symbol outside byte alphabet");
                    bytes.push_back(static_cast<char>(s));
                }
                ids = huffman_->decode(bytes);
                break;
            }
        }
        return tok_.decode(ids);
    }

  private:
    void init() {
        if (enc_ != TokenEncoding::TokenIndex) bytes_per_token_ = fixed_bytes_per_token(tok_.vocab_size());
        if (enc_ == TokenEncoding::GrayBytes) gray_.emplace(tok_);
        name_ = "tokenizer-" + std::string(token_encoding_name(enc_));
    }

    static void push_be(std::vector<std::uint32_t>& out, std::uint32_t value, std::uint32_t n_bytes) {
        for (std::uint32_t i = n_bytes; i-- > 0;) out.push_back((value >> (8 * i)) & 0xff);
    }

    std::vector<std::uint32_t> regroup(std::span<const std::uint32_t> symbols) const {
        if (symbols.size() % bytes_per_token_ != 0) throw DataError("byte-encoded token stream length not a multiple of B");
        std::vector<std::uint32_t> values;
        values.reserve(symbols.size() / bytes_per_token_);
        for (std::size_t i = 0; i < symbols.size(); i += bytes_per_token_) {
            std::uint32_t v = 0;
            for (std::uint32_t j = 0; j < bytes_per_token_; ++j) {
                if (symbols[i + j] > 255) throw DataError("byte-encoded token symbol outside byte alphabet");
                v = (v << 8) | symbols[i + j];
            }
            values.push_back(v);
        }
        return values;
    }

    BpeTokenizer tok_;
    TokenEncoding enc_;
    std::uint32_t bytes_per_token_ = 0;
    std::optional<ByteHuffman> huffman_;
    std::optional<GrayRanking> gray_;
    std::string name_;
};

// Deterministic gzip at the byte level: output bytes are the local symbols.
class GzipCompressor final : public ProxyCompressor {
  public:
    std::string_view name() const override { return "gzip"; }
    std::uint32_t comp_vocab_size() const override { return 256; }
    bool invertible() const override { return true; }

    std::vector<std::uint32_t> compress(std::string_view doc) const override {
        std::string gz = gzip_compress_bytes(doc);
        std::vector<std::uint32_t> out;
        out.reserve(gz.size());
        for (unsigned char c : gz) out.push_back(c);
        return out;
    }

    std::string decompress(std::span<const std::uint32_t> symbols) const override {
        std::string gz;
        gz.reserve(symbols.size());
        for (std::uint32_t s : symbols) {
            if (s > 255) throw DataError("gzip symbol outside byte alphabet");
            gz.push_back(static_cast<char>(s));
        }
        return gzip_decompress_bytes(gz);
    }
};

enum class SegmentStrategy { Entropy, FixedLength, Lines };

inline std::string_view segment_strategy_name(SegmentStrategy s) {
    switch (s) {
        case SegmentStrategy::Entropy: return "entropy";
        case SegmentStrategy::FixedLength: return "fixed";
        case SegmentStrategy::Lines: return "lines";
    }
    throw UsageError("unknown segment strategy");
}

inline SegmentStrategy segment_strategy_from_name(std::string_view name) {
    if (name == "entropy") return SegmentStrategy::Entropy;
    if (name == "fixed") return SegmentStrategy::FixedLength;
    if (name == "lines") return SegmentStrategy::Lines;
    throw UsageError("unknown segment strategy: " + std::string(name));
}

struct NeuralConfig {
    SegmentStrategy strategy = SegmentStrategy::Entropy;
    SegmentConfig segment;
    SegmentThresholds thresholds;  // from calibrate_thresholds; used by Entropy
    std::size_t fixed_segment_len = 16;
    WindowConfig window = WindowConfig::equal_info(16);
    PackingConfig packing = PackingConfig(16);
};

struct SegmentMeta {
    std::uint64_t byte_len = 0;
    std::uint64_t total_bits = 0;
    std::uint64_t symbol_count = 0;
};

// Neural proxy compression: entropy-segment the document, arithmetic-code
// each segment independently under the byte model with equal-information
// windows, pack the bits into N-bit symbols, and concatenate the segments'
// symbol blocks. Deterministic, and non-invertible without the per-segment
// metadata (segment boundaries and bit counts are not recoverable from the
// symbols alone).
template <class Model = ByteModel>
class NeuralCompressor final : public ProxyCompressor {
  public:
    NeuralCompressor(const Model& model, NeuralConfig cfg, SegmentCache* cache = nullptr)
        : model_(&model), cfg_(cfg), cache_(cache) {
        std::string blob;
        put_le<std::uint64_t>(blob, model.fingerprint());
        put_le<std::uint32_t>(blob, cfg.window.tau ? *cfg.window.tau : 0);
        put_le<std::uint32_t>(blob, cfg.packing.bits_per_symbol);
        config_fingerprint_ = fnv1a64(blob);
    }

    std::string_view name() const override { return "neural"; }
    std::uint32_t comp_vocab_size() const override { return cfg_.packing.vocab_size(); }
    bool invertible() const override { return false; }
    const NeuralConfig& config() const { return cfg_; }
    std::uint64_t config_fingerprint() const { return config_fingerprint_; }

    std::vector<std::uint32_t> compress(std::string_view doc) const override {
        return compress_with_metadata(doc).first;
    }

    std::pair<std::vector<std::uint32_t>, std::vector<SegmentMeta>> compress_with_metadata(std::string_view doc) const {
        if (doc.empty()) throw UsageError("cannot compress an empty document");
        std::vector<std::uint32_t> symbols;
        std::vector<SegmentMeta> metas;
        for (const Segment& seg : segment_doc(doc)) {
            std::string_view chunk = seg.bytes(doc);
            SegmentCache::Entry entry = coded_segment(chunk);
            metas.push_back({chunk.size(), entry.total_bits, entry.symbols.size()});
            symbols.insert(symbols.end(), entry.symbols.begin(), entry.symbols.end());
        }
        return {std::move(symbols), std::move(metas)};
    }

    std::string decompress(std::span<const std::uint32_t>) const override {
        throw DataError("neural compressor is not invertible without segment metadata");
    }

    // Testing-only inverse: replays per-segment decode from the metadata
    // emitted by compress_with_metadata under the same model and config.
    std::string decompress_with_metadata(std::span<const std::uint32_t> symbols, std::span<const SegmentMeta> metas) const {
        std::string out;
        std::size_t pos = 0;
        for (const SegmentMeta& m : metas) {
            if (pos + m.symbol_count > symbols.size()) throw DataError("segment metadata exceeds symbol stream");
            WindowedCode code;
            code.tau = cfg_.window.tau;
            code.bits = unpack_bits(symbols.subspan(pos, m.symbol_count), m.total_bits, cfg_.packing);
            out += ac_decode(code, *model_, m.byte_len);
            pos += m.symbol_count;
        }
        if (pos != symbols.size()) throw DataError("segment metadata does not cover the symbol stream");
        return out;
    }

    std::vector<Segment> segment_doc(std::string_view doc) const {
        switch (cfg_.strategy) {
            case SegmentStrategy::Entropy: return segment_entropy(doc, *model_, cfg_.thresholds, cfg_.segment);
            case SegmentStrategy::FixedLength: return segment_fixed(doc, cfg_.fixed_segment_len);
            case SegmentStrategy::Lines: return segment_lines(doc);
        }
        throw UsageError("unknown segment strategy");
    }

    // Cache-aware coding of one segment.
    SegmentCache::Entry coded_segment(std::string_view chunk) const {
        if (cache_ != nullptr) {
            auto k = SegmentCache::key(chunk, config_fingerprint_);
            if (auto hit = cache_->lookup(k)) return *hit;
            SegmentCache::Entry entry = encode_segment(chunk);
            cache_->insert(k, entry);
            return entry;
        }
        return encode_segment(chunk);
    }

  private:
    SegmentCache::Entry encode_segment(std::string_view chunk) const {
        WindowedCode code = ac_encode(chunk, *model_, cfg_.window);
        PackedSymbols packed = pack_bits(code, cfg_.packing);
        return {std::move(packed.symbols), packed.total_bits};
    }

    const Model* model_;
    NeuralConfig cfg_;
    SegmentCache* cache_;
    std::uint64_t config_fingerprint_ = 0;
};

}  // namespace pxmix

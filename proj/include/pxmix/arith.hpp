#pragma once

#include <array>
#include <cstdint>

#include "pxmix/bitio.hpp"
#include "pxmix/util.hpp"

namespace pxmix {

// Integer frequency view of a conditional next-byte distribution.
// Probabilities are exactly f[b] / total; the coder and the entropy profile
// consume the same integers, which is what keeps realized code lengths
// inside the [sum h_t, sum h_t + 2] bracket.
struct ByteFreqs {
    std::array<std::uint64_t, 256> f{};
    std::uint64_t total = 0;

    std::uint64_t cum_below(unsigned b) const {
        std::uint64_t c = 0;
        for (unsigned i = 0; i < b; ++i) c += f[i];
        return c;
    }
};

// 62-bit integer arithmetic coder (Witten/Neal/Cleary style E1/E2/E3
// renormalization, 128-bit intermediates). Integer-only state makes output
// bit-exact across platforms. Termination emits 2 bits plus any unresolved
// underflow bits, so a flushed code is D + 2 bits long where D is the
// number of renormalization shifts; the decoder mirrors the same shifts,
// which lets callers recover exact code lengths without storing them.
namespace ac {
inline constexpr int kCodeBits = 62;
inline constexpr std::uint64_t kMaxValue = (1ull << kCodeBits) - 1;
inline constexpr std::uint64_t kHalf = 1ull << (kCodeBits - 1);
inline constexpr std::uint64_t kQuarter = 1ull << (kCodeBits - 2);
inline constexpr std::uint64_t kThreeQuarters = kHalf + kQuarter;
// total frequency cap: keeps range/total >= 2^7 after renormalization so
// every nonzero frequency maps to a nonempty slice
inline constexpr std::uint64_t kMaxTotal = 1ull << 52;
}  // namespace ac

class ArithmeticEncoder {
  public:
    explicit ArithmeticEncoder(BitWriter* out) : out_(out) {}

    void encode(std::uint64_t cum_lo, std::uint64_t cum_hi, std::uint64_t total) {
        if (total == 0 || total > ac::kMaxTotal) throw DataError("arithmetic coder: invalid total frequency");
        if (cum_lo >= cum_hi || cum_hi > total) throw DataError("arithmetic coder: symbol has empty frequency slice");
        using u128 = unsigned __int128;
        std::uint64_t range = high_ - low_ + 1;
        high_ = low_ + static_cast<std::uint64_t>((u128)range * cum_hi / total) - 1;
        low_ = low_ + static_cast<std::uint64_t>((u128)range * cum_lo / total);
        for (;;) {
            if (high_ < ac::kHalf) {
                emit(0);
            } else if (low_ >= ac::kHalf) {
                emit(1);
                low_ -= ac::kHalf;
                high_ -= ac::kHalf;
            } else if (low_ >= ac::kQuarter && high_ < ac::kThreeQuarters) {
                ++pending_;
                low_ -= ac::kQuarter;
                high_ -= ac::kQuarter;
            } else {
                break;
            }
            low_ <<= 1;
            high_ = (high_ << 1) | 1;
        }
    }

    void encode_byte(const ByteFreqs& fr, std::uint8_t b) {
        std::uint64_t lo = fr.cum_below(b);
        encode(lo, lo + fr.f[b], fr.total);
    }

    // Terminates the code: any continuation of the emitted bits decodes to
    // the same symbols. Exactly 2 bits plus unresolved underflow bits.
    void finish() {
        ++pending_;
        emit(low_ >= ac::kQuarter ? 1 : 0);
    }

  private:
    void emit(int bit) {
        out_->push(bit);
        for (; pending_ > 0; --pending_) out_->push(!bit);
    }

    BitWriter* out_;
    std::uint64_t low_ = 0;
    std::uint64_t high_ = ac::kMaxValue;
    std::uint64_t pending_ = 0;
};

class ArithmeticDecoder {
  public:
    explicit ArithmeticDecoder(BitReader* in) : in_(in) {
        for (int i = 0; i < ac::kCodeBits; ++i) value_ = (value_ << 1) | static_cast<std::uint64_t>(in_->next());
    }

    std::uint8_t decode_byte(const ByteFreqs& fr) {
        using u128 = unsigned __int128;
        if (fr.total == 0 || fr.total > ac::kMaxTotal) throw DataError("arithmetic coder: invalid total frequency");
        std::uint64_t range = high_ - low_ + 1;
        std::uint64_t target = static_cast<std::uint64_t>(((u128)(value_ - low_ + 1) * fr.total - 1) / range);
        std::uint64_t cum = 0;
        unsigned b = 0;
        for (;; ++b) {
            if (b == 256) throw DataError("arithmetic coder: target outside cumulative table");
            if (cum + fr.f[b] > target) break;
            cum += fr.f[b];
        }
        std::uint64_t cum_hi = cum + fr.f[b];
        high_ = low_ + static_cast<std::uint64_t>((u128)range * cum_hi / fr.total) - 1;
        low_ = low_ + static_cast<std::uint64_t>((u128)range * cum / fr.total);
        for (;;) {
            if (high_ < ac::kHalf) {
                pending_ = 0;
            } else if (low_ >= ac::kHalf) {
                pending_ = 0;
                low_ -= ac::kHalf;
                high_ -= ac::kHalf;
                value_ -= ac::kHalf;
            } else if (low_ >= ac::kQuarter && high_ < ac::kThreeQuarters) {
                ++pending_;
                low_ -= ac::kQuarter;
                high_ -= ac::kQuarter;
                value_ -= ac::kQuarter;
            } else {
                break;
            }
            low_ <<= 1;
            high_ = (high_ << 1) | 1;
            value_ = (value_ << 1) | static_cast<std::uint64_t>(in_->next());
            ++shifts_;
        }
        return static_cast<std::uint8_t>(b);
    }

    // Total renormalization shifts so far; equals the number of bits the
    // encoder has emitted for the same symbols (underflow bits included).
    std::uint64_t shifts() const { return shifts_; }

    // Shifts whose bits the encoder has already written out, i.e. excluding
    // underflow bits still pending on the encoder side. This is the mirror
    // of the encoder's materialized bit count after the same symbol.
    std::uint64_t materialized_bits() const { return shifts_ - pending_; }

  private:
    BitReader* in_;
    std::uint64_t low_ = 0;
    std::uint64_t high_ = ac::kMaxValue;
    std::uint64_t value_ = 0;
    std::uint64_t shifts_ = 0;
    std::uint64_t pending_ = 0;
};

}  // namespace pxmix

#pragma once

#include <cstdint>
#include <vector>

#include "pxmix/util.hpp"

namespace pxmix {

// Bit order is big-endian everywhere: the first bit of a stream is the MSB
// of byte 0, and packed symbols take their bits MSB-first.
struct BitVec {
    std::vector<std::uint8_t> bytes;
    std::uint64_t nbits = 0;

    int bit(std::uint64_t i) const {
        if (i >= nbits) throw DataError("bit index out of range");
        return (bytes[i >> 3] >> (7 - (i & 7))) & 1;
    }
};

class BitWriter {
  public:
    void push(int bit) {
        std::uint64_t byte = v_.nbits >> 3;
        if (byte == v_.bytes.size()) v_.bytes.push_back(0);
        if (bit) v_.bytes[byte] |= static_cast<std::uint8_t>(0x80u >> (v_.nbits & 7));
        ++v_.nbits;
    }

    void push_bits(std::uint64_t value, int n) {
        for (int i = n - 1; i >= 0; --i) push(static_cast<int>((value >> i) & 1));
    }

    std::uint64_t size_bits() const { return v_.nbits; }
    const BitVec& view() const { return v_; }
    BitVec take() { return std::move(v_); }

  private:
    BitVec v_;
};

// Cursor over a BitVec. Reads past the end return 0: the arithmetic decoder
// prefetches its register beyond the code's final bit and the termination
// scheme makes those phantom bits irrelevant.
class BitReader {
  public:
    explicit BitReader(const BitVec& v, std::uint64_t start_bit = 0) : v_(&v), pos_(start_bit) {}

    int next() {
        int b = 0;
        if (pos_ < v_->nbits) b = (v_->bytes[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
        ++pos_;
        return b;
    }

    std::uint64_t position() const { return pos_; }

  private:
    const BitVec* v_;
    std::uint64_t pos_;
};

}  // namespace pxmix

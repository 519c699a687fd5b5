#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "errors.hpp"

namespace epsent {

/// MSB-first bit packer.
class BitWriter {
public:
    explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

    void write(std::uint64_t value, unsigned width) {
        for (unsigned i = width; i-- > 0;) put((value >> i) & 1U);
    }

    /// Truncated binary code of v in [0, m): floor(log2 m) or one more bit.
    void write_truncated(std::uint64_t v, std::uint64_t m) {
        if (m <= 1) return;
        const unsigned k = static_cast<unsigned>(std::bit_width(m) - 1);
        const std::uint64_t u = (std::uint64_t{2} << k) - m;
        if (v < u)
            write(v, k);
        else
            write(v + u, k + 1);
    }

    std::uint64_t bits_written() const { return bits_; }

private:
    void put(std::uint64_t bit) {
        if ((bits_ & 7U) == 0) out_.push_back(0);
        if (bit) out_.back() |= static_cast<std::uint8_t>(0x80U >> (bits_ & 7U));
        ++bits_;
    }

    std::vector<std::uint8_t>& out_;
    std::uint64_t bits_ = 0;
};

/// MSB-first bit reader over bytes [begin, end) of a buffer. Errors report
/// absolute byte offsets in that buffer.
class BitReader {
public:
    BitReader(std::span<const std::uint8_t> buffer, std::size_t begin)
        : buf_(buffer), pos_(std::uint64_t{begin} * 8) {}

    std::uint64_t read(unsigned width) {
        std::uint64_t v = 0;
        for (unsigned i = 0; i < width; ++i) v = (v << 1) | get();
        return v;
    }

    std::uint64_t read_truncated(std::uint64_t m) {
        if (m <= 1) return 0;
        const unsigned k = static_cast<unsigned>(std::bit_width(m) - 1);
        const std::uint64_t u = (std::uint64_t{2} << k) - m;
        const std::uint64_t x = read(k);
        if (x < u) return x;
        return ((x << 1) | get()) - u;
    }

    std::size_t byte_offset() const { return static_cast<std::size_t>(pos_ / 8); }

    /// Checks that only zero padding bits remain in the final byte and nothing after it.
    void expect_end() const {
        const std::uint64_t total = std::uint64_t{buf_.size()} * 8;
        if (total - pos_ >= 8 || total < pos_)
            throw decode_error("trailing data after end of stream", byte_offset());
        for (std::uint64_t p = pos_; p < total; ++p)
            if (bit_at(p)) throw decode_error("nonzero padding bits", byte_offset());
    }

private:
    std::uint64_t bit_at(std::uint64_t p) const { return (buf_[p / 8] >> (7 - p % 8)) & 1U; }

    std::uint64_t get() {
        if (pos_ >= std::uint64_t{buf_.size()} * 8)
            throw decode_error("stream truncated", buf_.size());
        return bit_at(pos_++);
    }

    std::span<const std::uint8_t> buf_;
    std::uint64_t pos_;
};

}  // namespace epsent

#include "ddcl/codec.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>

namespace ddcl::codec {

void BitString::push_bit(bool bit) {
    const std::size_t byte = len_ / 8;
    if (byte == bytes_.size()) bytes_.push_back(0);
    if (bit) bytes_[byte] |= static_cast<std::uint8_t>(0x80u >> (len_ % 8));
    ++len_;
}

void BitString::append(const BitString& other) {
    for (std::size_t i = 0; i < other.len_; ++i) push_bit(other.bit(i));
}

bool BitString::bit(std::size_t index) const {
    if (index >= len_) throw std::out_of_range("BitString::bit: index past end");
    return (bytes_[index / 8] >> (7 - index % 8)) & 1u;
}

std::string BitString::to_string() const {
    std::string s;
    s.reserve(len_);
    for (std::size_t i = 0; i < len_; ++i) s.push_back(bit(i) ? '1' : '0');
    return s;
}

BitString BitString::from_string(std::string_view zeros_and_ones) {
    BitString bs;
    for (char c : zeros_and_ones) {
        if (c == '0' || c == '1') {
            bs.push_bit(c == '1');
        } else if (c != ' ') {
            throw std::invalid_argument("BitString::from_string: expected 0/1/space");
        }
    }
    return bs;
}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes,
                                std::size_t bit_len) {
    if (bytes.size() * 8 < bit_len) {
        throw std::invalid_argument("BitString::from_bytes: byte buffer too short");
    }
    BitString bs;
    bs.bytes_.assign(bytes.begin(), bytes.end());
    bs.bytes_.resize((bit_len + 7) / 8);
    bs.len_ = bit_len;
    // Clear pad bits so equality and re-encoding are canonical.
    if (bit_len % 8 != 0 && !bs.bytes_.empty()) {
        bs.bytes_.back() &= static_cast<std::uint8_t>(0xFF00u >> (bit_len % 8));
    }
    return bs;
}

std::uint32_t zigzag(std::int32_t m) {
    if (m == INT32_MIN) throw std::overflow_error("zigzag: |m| exceeds 2^31-1");
    const std::uint32_t mag = static_cast<std::uint32_t>(m < 0 ? -m : m);
    return m >= 0 ? 2u * mag : 2u * mag - 1u;
}

std::int32_t unzigzag(std::uint32_t k) {
    if (k % 2 == 0) return static_cast<std::int32_t>(k / 2);
    return static_cast<std::int32_t>(-static_cast<std::int64_t>(k / 2) - 1);
}

namespace {

// Elias gamma of n >= 1: for N = bit_width(n)-1, N zeros then the N+1
// binary digits of n, MSB first.
void append_gamma(BitString& bs, std::uint64_t n) {
    const int width = std::bit_width(n);
    for (int i = 1; i < width; ++i) bs.push_bit(false);
    for (int i = width - 1; i >= 0; --i) bs.push_bit((n >> i) & 1u);
}

}  // namespace

BitString encode_int(std::int32_t m) {
    BitString bs;
    append_gamma(bs, static_cast<std::uint64_t>(zigzag(m)) + 1);
    return bs;
}

std::size_t encoded_bit_length(std::int32_t m) {
    const std::uint64_t n = static_cast<std::uint64_t>(zigzag(m)) + 1;
    return 2 * static_cast<std::size_t>(std::bit_width(n) - 1) + 1;
}

std::pair<std::int32_t, std::size_t> decode_int(const BitString& bits,
                                                std::size_t cursor) {
    std::size_t zeros = 0;
    std::size_t pos = cursor;
    while (true) {
        if (pos >= bits.size()) {
            throw DecodeError("decode_int: truncated codeword", pos);
        }
        if (bits.bit(pos)) break;
        ++zeros;
        ++pos;
        if (zeros > 31) {
            throw DecodeError("decode_int: codeword exceeds 32-bit range", pos);
        }
    }
    ++pos;  // consume the leading 1
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < zeros; ++i) {
        if (pos >= bits.size()) {
            throw DecodeError("decode_int: truncated codeword", pos);
        }
        n = (n << 1) | static_cast<std::uint64_t>(bits.bit(pos));
        ++pos;
    }
    return {unzigzag(static_cast<std::uint32_t>(n - 1)), pos};
}

BitString encode_message(std::span<const std::int32_t> ints) {
    BitString bs;
    for (std::int32_t m : ints) append_gamma(bs, static_cast<std::uint64_t>(zigzag(m)) + 1);
    return bs;
}

std::vector<std::int32_t> decode_message(const BitString& bits,
                                         std::size_t count) {
    std::vector<std::int32_t> out;
    out.reserve(count);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < count; ++i) {
        auto [value, next] = decode_int(bits, cursor);
        out.push_back(value);
        cursor = next;
    }
    if (cursor != bits.size()) {
        throw DecodeError("decode_message: trailing bits after last codeword", cursor);
    }
    return out;
}

double ideal_bit_length(std::int32_t m) {
    return std::log2(2.0 * std::fabs(static_cast<double>(m)) + 1.0);
}

double ideal_bits_total(std::span<const std::int32_t> ints) {
    double total = 0.0;
    for (std::int32_t m : ints) total += ideal_bit_length(m);
    return total;
}

}  // namespace ddcl::codec

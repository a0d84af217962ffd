#ifndef DDCL_CODEC_HPP
#define DDCL_CODEC_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ddcl::codec {

/// Thrown when a bitstream cannot be decoded; `offset` is the bit position
/// at which decoding failed.
class DecodeError : public std::runtime_error {
public:
    DecodeError(const std::string& what, std::size_t offset)
        : std::runtime_error(what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Variable-length bit buffer, MSB-first within each byte. Pad bits past
/// size() are always zero; see docs/codec.md for the normative bit order.
class BitString {
public:
    BitString() = default;

    void push_bit(bool bit);
    void append(const BitString& other);

    bool bit(std::size_t index) const;
    std::size_t size() const noexcept { return len_; }
    bool empty() const noexcept { return len_ == 0; }
    const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

    std::string to_string() const;
    static BitString from_string(std::string_view zeros_and_ones);

    /// Reconstitute from packed bytes. Does not validate pad bits; the
    /// wire layer enforces the zero-padding rule with its own error code.
    static BitString from_bytes(std::span<const std::uint8_t> bytes,
                                std::size_t bit_len);

    friend bool operator==(const BitString&, const BitString&) = default;

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t len_ = 0;
};

/// Sign fold: m >= 0 maps to 2|m|, m < 0 maps to 2|m|-1. Bijection from
/// [-2^31+1, 2^31-1] onto [0, 2^32-2]. INT32_MIN is out of range.
std::uint32_t zigzag(std::int32_t m);
std::int32_t unzigzag(std::uint32_t k);

/// Elias-gamma code of zigzag(m)+1. m = 0 encodes to the single bit "1",
/// and codeword length is monotone in |m|.
BitString encode_int(std::int32_t m);
std::size_t encoded_bit_length(std::int32_t m);

/// Decodes one codeword starting at `cursor`; returns the value and the
/// cursor just past the codeword. Throws DecodeError on truncation.
std::pair<std::int32_t, std::size_t> decode_int(const BitString& bits,
                                                std::size_t cursor);

BitString encode_message(std::span<const std::int32_t> ints);
std::vector<std::int32_t> decode_message(const BitString& bits,
                                         std::size_t count);

/// log2(2|m|+1): the fractional-bit accounting used by all rate metrics.
double ideal_bit_length(std::int32_t m);
double ideal_bits_total(std::span<const std::int32_t> ints);

}  // namespace ddcl::codec

#endif

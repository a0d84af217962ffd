#ifndef DDCL_WIRE_HPP
#define DDCL_WIRE_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddcl/channel.hpp"

namespace ddcl::wire {

// Frame layout (big-endian fixed header, normative; see docs/wire.md):
//   magic(1)=0xD7  version(1)=0x01  edge_id(4)  timestep(4)
//   dim_count(2)   payload_bit_len(4)  payload(ceil(bits/8), zero-padded)
inline constexpr std::uint8_t kMagic = 0xD7;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kHeaderBytes = 16;
inline constexpr std::size_t kMaxDims = 65535;

enum class WireErrc {
    MagicMismatch,
    VersionMismatch,
    Truncated,
    TrailingBytes,
    NonzeroPadding,
    MalformedPayload,
    DimOverflow,
};

const char* to_string(WireErrc code) noexcept;

class WireError : public std::runtime_error {
public:
    WireError(WireErrc code, std::size_t offset, const std::string& what)
        : std::runtime_error(what), code_(code), offset_(offset) {}
    WireErrc code() const noexcept { return code_; }
    /// Byte offset within the frame at which the problem was detected.
    std::size_t offset() const noexcept { return offset_; }

private:
    WireErrc code_;
    std::size_t offset_;
};

struct DecodedFrame {
    channel::DiscreteMessage message;
    std::uint32_t edge_id = 0;
    std::uint32_t timestep = 0;
};

/// Deterministic serialization; the only canonical encoding of a message.
std::vector<std::uint8_t> encode_frame(const channel::DiscreteMessage& m,
                                       std::uint32_t edge_id,
                                       std::uint32_t timestep);

/// Exact inverse of encode_frame. Rejects bad magic/version, truncation,
/// trailing bytes, nonzero pad bits and payloads that do not decode to
/// exactly dim_count integers in exactly payload_bit_len bits.
DecodedFrame decode_frame(std::span<const std::uint8_t> bytes);

}  // namespace ddcl::wire

#endif

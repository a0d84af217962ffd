#include "ddcl/wire.hpp"

#include "ddcl/codec.hpp"

namespace ddcl::wire {

const char* to_string(WireErrc code) noexcept {
    switch (code) {
        case WireErrc::MagicMismatch: return "MagicMismatch";
        case WireErrc::VersionMismatch: return "VersionMismatch";
        case WireErrc::Truncated: return "Truncated";
        case WireErrc::TrailingBytes: return "TrailingBytes";
        case WireErrc::NonzeroPadding: return "NonzeroPadding";
        case WireErrc::MalformedPayload: return "MalformedPayload";
        case WireErrc::DimOverflow: return "DimOverflow";
    }
    return "Unknown";
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return (static_cast<std::uint32_t>(b[at]) << 24) |
           (static_cast<std::uint32_t>(b[at + 1]) << 16) |
           (static_cast<std::uint32_t>(b[at + 2]) << 8) |
           static_cast<std::uint32_t>(b[at + 3]);
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const channel::DiscreteMessage& m,
                                       std::uint32_t edge_id,
                                       std::uint32_t timestep) {
    if (m.ints.size() > kMaxDims) {
        throw WireError(WireErrc::DimOverflow, 0,
                        "encode_frame: dim_count exceeds 65535");
    }
    const codec::BitString payload = codec::encode_message(m.ints);

    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + payload.bytes().size());
    out.push_back(kMagic);
    out.push_back(kVersion);
    put_u32(out, edge_id);
    put_u32(out, timestep);
    put_u16(out, static_cast<std::uint16_t>(m.ints.size()));
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    out.insert(out.end(), payload.bytes().begin(), payload.bytes().end());
    return out;
}

DecodedFrame decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes) {
        throw WireError(WireErrc::Truncated, bytes.size(),
                        "decode_frame: header truncated");
    }
    if (bytes[0] != kMagic) {
        throw WireError(WireErrc::MagicMismatch, 0, "decode_frame: bad magic byte");
    }
    if (bytes[1] != kVersion) {
        throw WireError(WireErrc::VersionMismatch, 1,
                        "decode_frame: unsupported version");
    }
    DecodedFrame frame;
    frame.edge_id = get_u32(bytes, 2);
    frame.timestep = get_u32(bytes, 6);
    const std::uint16_t dim_count = get_u16(bytes, 10);
    const std::uint32_t payload_bits = get_u32(bytes, 12);
    const std::size_t payload_bytes = (static_cast<std::size_t>(payload_bits) + 7) / 8;

    if (bytes.size() < kHeaderBytes + payload_bytes) {
        throw WireError(WireErrc::Truncated, bytes.size(),
                        "decode_frame: payload truncated");
    }
    if (bytes.size() > kHeaderBytes + payload_bytes) {
        throw WireError(WireErrc::TrailingBytes, kHeaderBytes + payload_bytes,
                        "decode_frame: bytes past end of frame");
    }

    const auto payload = bytes.subspan(kHeaderBytes, payload_bytes);
    if (payload_bits % 8 != 0 && payload_bytes > 0) {
        const std::uint8_t pad_mask =
            static_cast<std::uint8_t>(0xFFu >> (payload_bits % 8));
        if ((payload[payload_bytes - 1] & pad_mask) != 0) {
            throw WireError(WireErrc::NonzeroPadding,
                            kHeaderBytes + payload_bytes - 1,
                            "decode_frame: nonzero pad bits");
        }
    }

    const codec::BitString bits = codec::BitString::from_bytes(payload, payload_bits);
    try {
        frame.message.ints = codec::decode_message(bits, dim_count);
    } catch (const codec::DecodeError& e) {
        throw WireError(WireErrc::MalformedPayload,
                        kHeaderBytes + e.offset() / 8,
                        std::string("decode_frame: ") + e.what());
    }
    frame.message.ideal_bits = codec::ideal_bits_total(frame.message.ints);
    frame.message.encoded_bits = payload_bits;
    return frame;
}

}  // namespace ddcl::wire

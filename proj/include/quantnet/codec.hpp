#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "quantnet/quantizer.hpp"

namespace quantnet {

// Wire layout, all little-endian:
//   u16 sender | u8 kind | u32 iteration | packed indices
// Each index takes n+1 bits (n magnitude bits, then a sign bit), written
// LSB-first into a continuous bit stream that is zero-padded to a byte boundary.
inline constexpr std::size_t kMessageHeaderBytes = 7;

std::size_t payload_bytes(std::size_t count, int bits);

std::vector<std::uint8_t> encode(const QuantizedMessage& msg);

// Reconstructs against the receiver's copy of the quantizer (same n, l and
// mid as the sender). Throws kMalformedMessage on any length, kind or range
// violation.
QuantizedMessage decode(std::span<const std::uint8_t> bytes, const UniformQuantizer& q);

}  // namespace quantnet

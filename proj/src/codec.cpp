#include "quantnet/codec.hpp"

#include <limits>
#include <string>

#include "quantnet/error.hpp"

namespace quantnet {
namespace {

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint64_t value, int width) {
    for (int b = 0; b < width; ++b) {
      if (bit_ == 0) out_.push_back(0);
      if ((value >> b) & 1u) out_.back() |= static_cast<std::uint8_t>(1u << bit_);
      bit_ = (bit_ + 1) % 8;
    }
  }

 private:
  std::vector<std::uint8_t>& out_;
  int bit_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint64_t get(int width) {
    std::uint64_t value = 0;
    for (int b = 0; b < width; ++b, ++pos_) {
      const std::uint8_t byte = in_[pos_ / 8];
      if ((byte >> (pos_ % 8)) & 1u) value |= std::uint64_t{1} << b;
    }
    return value;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int b = 0; b < bytes; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v |= std::uint64_t{in[at + b]} << (8 * b);
  return v;
}

}  // namespace

std::size_t payload_bytes(std::size_t count, int bits) {
  return (count * static_cast<std::size_t>(bits + 1) + 7) / 8;
}

std::vector<std::uint8_t> encode(const QuantizedMessage& msg) {
  if (msg.bits < 1 || msg.bits > UniformQuantizer::kMaxBits) {
    throw Error(ErrorCode::kInvalidArgument, "encode: bits out of range");
  }
  if (msg.sender < 0 || msg.sender > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "encode: sender does not fit in 16 bits");
  }
  const std::int64_t cap = std::int64_t{1} << (msg.bits - 1);
  std::vector<std::uint8_t> out;
  out.reserve(kMessageHeaderBytes + payload_bytes(msg.indices.size(), msg.bits));
  put_le(out, static_cast<std::uint64_t>(msg.sender), 2);
  out.push_back(static_cast<std::uint8_t>(msg.kind));
  put_le(out, msg.iteration, 4);

  BitWriter writer(out);
  for (std::int64_t idx : msg.indices) {
    if (idx > cap || idx < -cap) throw Error(ErrorCode::kInvalidArgument, "encode: index out of range");
    const std::uint64_t magnitude = static_cast<std::uint64_t>(idx < 0 ? -idx : idx);
    writer.put(magnitude, msg.bits);
    writer.put(idx < 0 ? 1u : 0u, 1);
  }
  return out;
}

QuantizedMessage decode(std::span<const std::uint8_t> bytes, const UniformQuantizer& q) {
  const auto count = static_cast<std::size_t>(q.dim());
  const std::size_t expected = kMessageHeaderBytes + payload_bytes(count, q.bits());
  if (bytes.size() != expected) {
    throw Error(ErrorCode::kMalformedMessage, "expected " + std::to_string(expected) + " bytes, got " +
                                                  std::to_string(bytes.size()));
  }
  QuantizedMessage msg;
  msg.sender = static_cast<int>(get_le(bytes, 0, 2));
  const auto kind = bytes[2];
  if (kind > static_cast<std::uint8_t>(MessageKind::kGradient)) {
    throw Error(ErrorCode::kMalformedMessage, "unknown message kind " + std::to_string(kind));
  }
  msg.kind = static_cast<MessageKind>(kind);
  msg.iteration = static_cast<std::uint32_t>(get_le(bytes, 3, 4));
  msg.bits = q.bits();

  const std::uint64_t cap = static_cast<std::uint64_t>(q.max_index());
  BitReader reader(bytes.subspan(kMessageHeaderBytes));
  msg.indices.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint64_t magnitude = reader.get(q.bits());
    const bool negative = reader.get(1) != 0;
    if (magnitude > cap) throw Error(ErrorCode::kMalformedMessage, "index magnitude out of range");
    if (negative && magnitude == 0) throw Error(ErrorCode::kMalformedMessage, "negative zero index");
    const auto m = static_cast<std::int64_t>(magnitude);
    msg.indices[k] = negative ? -m : m;
  }
  msg.reconstructed = q.reconstruct(msg.indices);
  return msg;
}

}  // namespace quantnet

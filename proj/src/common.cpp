#include "geomarket/common.hpp"

#include <cstring>

namespace geomarket {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kOutOfDomain: return "out-of-domain";
    case ErrorCode::kSizeLimit: return "size-limit";
    case ErrorCode::kNotAligned: return "not-aligned";
    case ErrorCode::kDuplicate: return "duplicate";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kIntegrity: return "integrity";
    case ErrorCode::kAuthentication: return "authentication";
    case ErrorCode::kPolicy: return "policy";
    case ErrorCode::kInsufficientFunds: return "insufficient-funds";
    case ErrorCode::kInvalidState: return "invalid-state";
    case ErrorCode::kCrypto: return "crypto";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
  }
  return "unknown";
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(ErrorCode::kFormat, "hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::kFormat, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

std::string ObjectId::hex() const { return to_hex(bytes); }

ObjectId ObjectId::from_hex(std::string_view hex) {
  Bytes raw = geomarket::from_hex(hex);
  if (raw.size() != 16) throw Error(ErrorCode::kFormat, "object id must be 16 bytes");
  ObjectId id;
  std::memcpy(id.bytes.data(), raw.data(), 16);
  return id;
}

ObjectId ObjectId::from_index(std::uint64_t index) {
  ObjectId id;
  for (int i = 0; i < 8; ++i) id.bytes[15 - i] = static_cast<std::uint8_t>(index >> (8 * i));
  return id;
}

std::size_t ObjectIdHash::operator()(const ObjectId& id) const noexcept {
  std::uint64_t a = 0, b = 0;
  std::memcpy(&a, id.bytes.data(), 8);
  std::memcpy(&b, id.bytes.data() + 8, 8);
  return static_cast<std::size_t>(a * 0x9e3779b97f4a7c15ULL ^ b);
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_blob(Bytes& out, ByteView blob) {
  put_u32(out, static_cast<std::uint32_t>(blob.size()));
  out.insert(out.end(), blob.begin(), blob.end());
}

ByteView Reader::take(std::size_t n) {
  if (remaining() < n) throw Error(ErrorCode::kFormat, "truncated input");
  ByteView v = data_.subspan(pos_, n);
  pos_ += n;
  return v;
}

std::uint8_t Reader::u8() { return take(1)[0]; }

std::uint32_t Reader::u32() {
  ByteView v = take(4);
  std::uint32_t r = 0;
  for (std::uint8_t b : v) r = (r << 8) | b;
  return r;
}

std::uint64_t Reader::u64() {
  ByteView v = take(8);
  std::uint64_t r = 0;
  for (std::uint8_t b : v) r = (r << 8) | b;
  return r;
}

Bytes Reader::blob() {
  std::uint32_t n = u32();
  ByteView v = take(n);
  return Bytes(v.begin(), v.end());
}

}  // namespace geomarket

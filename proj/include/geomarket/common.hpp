#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace geomarket {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Numeric values are part of the C ABI (see geomarket.h); keep them stable.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kOutOfDomain = 2,
  kSizeLimit = 3,
  kNotAligned = 4,
  kDuplicate = 5,
  kNotFound = 6,
  kIntegrity = 7,
  kAuthentication = 8,
  kPolicy = 9,
  kInsufficientFunds = 10,
  kInvalidState = 11,
  kCrypto = 12,
  kIo = 13,
  kFormat = 14,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Pseudorandom 128-bit object identifier (OID). Independent of the object's
/// content and location.
struct ObjectId {
  std::array<std::uint8_t, 16> bytes{};

  auto operator<=>(const ObjectId&) const = default;

  std::string hex() const;
  static ObjectId from_hex(std::string_view hex);
  /// Deterministic id for tests and synthetic datasets.
  static ObjectId from_index(std::uint64_t index);
};

struct ObjectIdHash {
  std::size_t operator()(const ObjectId& id) const noexcept;
};

std::string to_hex(ByteView bytes);
Bytes from_hex(std::string_view hex);

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

// Little helpers for the binary containers (big-endian on the wire).
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);
void put_blob(Bytes& out, ByteView blob);  // u32 length prefix

class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  ByteView take(std::size_t n);
  Bytes blob();
  bool done() const noexcept { return pos_ == data_.size(); }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace geomarket

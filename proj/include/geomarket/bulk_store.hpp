#pragma once

// Key-value store standing in for a DHT-based storage network. Values are
// stored with their SHA-256 content hash and checked on every read. Large
// values (indexes) can be split into content-addressed chunks.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "geomarket/common.hpp"
#include "geomarket/crypto.hpp"

namespace geomarket::store {

struct ChunkedInfo {
  crypto::Digest content_hash{};  // of the whole value
  std::uint64_t size = 0;
  std::uint64_t chunk_size = 0;
  std::vector<crypto::Digest> chunks;
};

class BulkStore {
 public:
  /// In-memory store.
  BulkStore() = default;
  /// Directory-backed store: one file per key, named by the key's hash.
  /// Existing files in `dir` are visible immediately.
  explicit BulkStore(std::filesystem::path dir);

  crypto::Digest put(ByteView key, ByteView value);
  /// Throws kNotFound for an absent key, kIntegrity on a hash mismatch.
  Bytes get(ByteView key) const;
  bool contains(ByteView key) const;
  bool remove(ByteView key);

  ChunkedInfo put_chunked(ByteView key, ByteView value, std::size_t chunk_size);
  /// Throws kIntegrity if any chunk is missing or corrupted.
  Bytes get_chunked(ByteView key) const;
  ChunkedInfo chunked_info(ByteView key) const;
  static Bytes chunk_key(const crypto::Digest& chunk_hash);

  std::size_t key_count() const;
  std::uint64_t stored_bytes() const;

 private:
  struct Entry {
    crypto::Digest hash{};
    Bytes value;
  };
  std::filesystem::path file_for(ByteView key) const;
  std::optional<Entry> load(ByteView key) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mu_;
  std::map<Bytes, Entry> mem_;
};

}  // namespace geomarket::store

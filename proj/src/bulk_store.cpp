#include "geomarket/bulk_store.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <mutex>

namespace geomarket::store {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kManifestMagic = 0x47434D46;  // "GCMF"

Bytes encode_manifest(const ChunkedInfo& info) {
  Bytes out;
  put_u32(out, kManifestMagic);
  out.insert(out.end(), info.content_hash.begin(), info.content_hash.end());
  put_u64(out, info.size);
  put_u64(out, info.chunk_size);
  put_u64(out, info.chunks.size());
  for (const auto& h : info.chunks) out.insert(out.end(), h.begin(), h.end());
  return out;
}

crypto::Digest take_digest(Reader& in) {
  crypto::Digest d{};
  ByteView v = in.take(d.size());
  std::memcpy(d.data(), v.data(), d.size());
  return d;
}

ChunkedInfo decode_manifest(ByteView bytes) {
  Reader in(bytes);
  if (in.u32() != kManifestMagic) throw Error(ErrorCode::kFormat, "value is not a chunk manifest");
  ChunkedInfo info;
  info.content_hash = take_digest(in);
  info.size = in.u64();
  info.chunk_size = in.u64();
  const std::uint64_t n = in.u64();
  if (n > in.remaining() / 32) throw Error(ErrorCode::kFormat, "chunk manifest overruns its buffer");
  for (std::uint64_t i = 0; i < n; ++i) info.chunks.push_back(take_digest(in));
  if (!in.done()) throw Error(ErrorCode::kFormat, "trailing bytes after chunk manifest");
  return info;
}

}  // namespace

BulkStore::BulkStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(*dir_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create store directory " + dir_->string() + ": " + ec.message());
}

fs::path BulkStore::file_for(ByteView key) const { return *dir_ / to_hex(crypto::sha256(key)); }

std::optional<BulkStore::Entry> BulkStore::load(ByteView key) const {
  if (!dir_) {
    auto it = mem_.find(Bytes(key.begin(), key.end()));
    if (it == mem_.end()) return std::nullopt;
    return it->second;
  }
  std::ifstream in(file_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  Bytes raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.size() < 32) throw Error(ErrorCode::kIntegrity, "stored record is truncated");
  Entry e;
  std::memcpy(e.hash.data(), raw.data(), 32);
  e.value.assign(raw.begin() + 32, raw.end());
  return e;
}

crypto::Digest BulkStore::put(ByteView key, ByteView value) {
  if (key.empty()) throw Error(ErrorCode::kInvalidArgument, "store keys must be non-empty");
  crypto::Digest h = crypto::sha256(value);
  std::unique_lock lock(mu_);
  if (!dir_) {
    mem_[Bytes(key.begin(), key.end())] = Entry{h, Bytes(value.begin(), value.end())};
    return h;
  }
  fs::path target = file_for(key);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));
    out.write(reinterpret_cast<const char*>(value.data()), static_cast<std::streamsize>(value.size()));
    if (!out) throw Error(ErrorCode::kIo, "failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::kIo, "failed to publish " + target.string() + ": " + ec.message());
  return h;
}

Bytes BulkStore::get(ByteView key) const {
  std::shared_lock lock(mu_);
  std::optional<Entry> e = load(key);
  if (!e) throw Error(ErrorCode::kNotFound, "no value stored under key " + to_hex(key));
  if (crypto::sha256(ByteView(e->value)) != e->hash) {
    throw Error(ErrorCode::kIntegrity, "stored value does not match its content hash");
  }
  return std::move(e->value);
}

bool BulkStore::contains(ByteView key) const {
  std::shared_lock lock(mu_);
  if (!dir_) return mem_.count(Bytes(key.begin(), key.end())) != 0;
  return fs::exists(file_for(key));
}

bool BulkStore::remove(ByteView key) {
  std::unique_lock lock(mu_);
  if (!dir_) return mem_.erase(Bytes(key.begin(), key.end())) != 0;
  std::error_code ec;
  return fs::remove(file_for(key), ec);
}

Bytes BulkStore::chunk_key(const crypto::Digest& chunk_hash) {
  static constexpr std::string_view kPrefix = "chunk/";
  Bytes k(kPrefix.size() + chunk_hash.size());
  std::memcpy(k.data(), kPrefix.data(), kPrefix.size());
  std::memcpy(k.data() + kPrefix.size(), chunk_hash.data(), chunk_hash.size());
  return k;
}

ChunkedInfo BulkStore::put_chunked(ByteView key, ByteView value, std::size_t chunk_size) {
  if (chunk_size == 0) throw Error(ErrorCode::kInvalidArgument, "chunk size must be positive");
  ChunkedInfo info;
  info.content_hash = crypto::sha256(value);
  info.size = value.size();
  info.chunk_size = chunk_size;
  for (std::size_t off = 0; off < value.size(); off += chunk_size) {
    ByteView part = value.subspan(off, std::min(chunk_size, value.size() - off));
    crypto::Digest h = crypto::sha256(part);
    put(ByteView(chunk_key(h)), part);
    info.chunks.push_back(h);
  }
  put(key, ByteView(encode_manifest(info)));
  return info;
}

ChunkedInfo BulkStore::chunked_info(ByteView key) const {
  Bytes manifest = get(key);
  return decode_manifest(ByteView(manifest));
}

Bytes BulkStore::get_chunked(ByteView key) const {
  ChunkedInfo info = chunked_info(key);
  Bytes out;
  out.reserve(static_cast<std::size_t>(info.size));
  for (std::size_t i = 0; i < info.chunks.size(); ++i) {
    Bytes part;
    try {
      part = get(ByteView(chunk_key(info.chunks[i])));
    } catch (const Error& e) {
      throw Error(ErrorCode::kIntegrity, "chunk " + std::to_string(i) + " unavailable: " + e.what());
    }
    if (crypto::sha256(ByteView(part)) != info.chunks[i]) {
      throw Error(ErrorCode::kIntegrity, "chunk " + std::to_string(i) + " does not match the manifest");
    }
    out.insert(out.end(), part.begin(), part.end());
  }
  if (out.size() != info.size || crypto::sha256(ByteView(out)) != info.content_hash) {
    throw Error(ErrorCode::kIntegrity, "reassembled value does not match the manifest");
  }
  return out;
}

std::size_t BulkStore::key_count() const {
  std::shared_lock lock(mu_);
  if (!dir_) return mem_.size();
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(*dir_)) {
    if (entry.is_regular_file() && entry.path().extension() != ".tmp") ++n;
  }
  return n;
}

std::uint64_t BulkStore::stored_bytes() const {
  std::shared_lock lock(mu_);
  std::uint64_t n = 0;
  if (!dir_) {
    for (const auto& [k, e] : mem_) n += e.value.size();
    return n;
  }
  for (const auto& entry : fs::directory_iterator(*dir_)) {
    if (entry.is_regular_file() && entry.path().extension() != ".tmp") n += entry.file_size() - 32;
  }
  return n;
}

}  // namespace geomarket::store

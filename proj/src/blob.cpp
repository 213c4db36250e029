#include "fracsim/blob.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iterator>

namespace fracsim {
namespace {

constexpr std::size_t kMagicBytes = 8;

std::uint32_t crc_of(const unsigned char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string padded_magic(std::string_view magic) {
  std::string m(magic.substr(0, kMagicBytes));
  m.resize(kMagicBytes, '\0');
  return m;
}

}  // namespace

BlobWriter::BlobWriter(std::string_view magic, std::uint32_t version) {
  const std::string m = padded_magic(magic);
  bytes_.insert(bytes_.end(), m.begin(), m.end());
  put(version);
}

void BlobWriter::put_doubles(std::span<const double> v) {
  const auto* p = reinterpret_cast<const unsigned char*>(v.data());
  bytes_.insert(bytes_.end(), p, p + v.size_bytes());
}

void BlobWriter::write(const std::filesystem::path& path) const {
  const std::uint32_t crc = crc_of(bytes_.data(), bytes_.size());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw BlobError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes_.data()),
              static_cast<std::streamsize>(bytes_.size()));
    out.write(reinterpret_cast<const char*>(&crc), sizeof crc);
    if (!out) throw BlobError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

BlobReader::BlobReader(const std::filesystem::path& path, std::string_view magic,
                       std::uint32_t version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BlobError("cannot open " + path.string());
  bytes_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  if (bytes_.size() < kMagicBytes + 2 * sizeof(std::uint32_t))
    throw BlobError(path.string() + ": truncated blob");
  end_ = bytes_.size() - sizeof(std::uint32_t);
  std::uint32_t stored;
  std::memcpy(&stored, bytes_.data() + end_, sizeof stored);
  if (stored != crc_of(bytes_.data(), end_)) throw BlobError(path.string() + ": checksum mismatch");
  if (std::memcmp(bytes_.data(), padded_magic(magic).data(), kMagicBytes) != 0)
    throw BlobError(path.string() + ": wrong magic");
  pos_ = kMagicBytes;
  if (get<std::uint32_t>() != version) throw BlobError(path.string() + ": unsupported version");
}

void BlobReader::get_doubles(std::span<double> out) {
  need(out.size_bytes());
  std::memcpy(out.data(), bytes_.data() + pos_, out.size_bytes());
  pos_ += out.size_bytes();
}

void BlobReader::need(std::size_t n) const {
  if (pos_ + n > end_) throw BlobError("blob payload shorter than expected");
}

}  // namespace fracsim

#pragma once

// Versioned binary blobs with a CRC-32 trailer.
//
// Layout: 8-byte magic, u32 format version, payload, u32 CRC-32 of every
// preceding byte. Scalars are little-endian.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace fracsim {

static_assert(std::endian::native == std::endian::little, "blob I/O assumes a little-endian host");

class BlobError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BlobWriter {
 public:
  BlobWriter(std::string_view magic, std::uint32_t version);

  template <class T>
    requires std::is_arithmetic_v<T>
  void put(T v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_doubles(std::span<const double> v);

  /// Appends the CRC and writes through a temporary file renamed into place.
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<unsigned char> bytes_;
};

class BlobReader {
 public:
  /// Throws BlobError on missing file, wrong magic/version or CRC mismatch.
  BlobReader(const std::filesystem::path& path, std::string_view magic, std::uint32_t version);

  template <class T>
    requires std::is_arithmetic_v<T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void get_doubles(std::span<double> out);
  bool exhausted() const noexcept { return pos_ == end_; }

 private:
  void need(std::size_t n) const;

  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

}  // namespace fracsim

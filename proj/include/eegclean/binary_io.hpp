#pragma once

// Little-endian primitive encoding shared by the store, checkpoint and
// coefficient-dump formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eegclean/errors.hpp"

namespace eegclean::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  void text(std::string_view s) { bytes(s.data(), s.size()); }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void f32(float v) { bytes(&v, 4); }
  void f64(double v) { bytes(&v, 8); }

  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }

  void read(void* out, std::size_t n, std::string_view what) {
    if (remaining() < n)
      throw FormatError("unexpected end of data while reading " + std::string(what));
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  std::string text(std::size_t n, std::string_view what) {
    std::string s(n, '\0');
    read(s.data(), n, what);
    return s;
  }
  std::uint8_t u8(std::string_view what) { std::uint8_t v; read(&v, 1, what); return v; }
  std::uint32_t u32(std::string_view what) { std::uint32_t v; read(&v, 4, what); return v; }
  std::uint64_t u64(std::string_view what) { std::uint64_t v; read(&v, 8, what); return v; }
  float f32(std::string_view what) { float v; read(&v, 4, what); return v; }
  double f64(std::string_view what) { double v; read(&v, 8, what); return v; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline void write_text_file(const std::string& path, std::string_view text) {
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// 64-bit FNV-1a, used as a content fingerprint in reports.
inline std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace eegclean::io

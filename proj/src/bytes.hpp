#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace diffseg::detail {

inline void put_u32le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xffu));
  out.push_back(static_cast<char>((v >> 8) & 0xffu));
  out.push_back(static_cast<char>((v >> 16) & 0xffu));
  out.push_back(static_cast<char>((v >> 24) & 0xffu));
}

inline void put_f64le(std::string& out, double d) {
  const uint64_t b = std::bit_cast<uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((b >> (8 * i)) & 0xffu));
}

struct ByteReader {
  const std::string& bytes;
  const std::string context;  // usually the file path, for error messages
  size_t pos = 0;

  size_t remaining() const { return bytes.size() - pos; }
  bool at_end() const { return pos == bytes.size(); }

  void require(size_t n, const char* what) const {
    if (remaining() < n)
      throw std::runtime_error(context + ": truncated while reading " + what + " (need " +
                               std::to_string(n) + " bytes, have " +
                               std::to_string(remaining()) + ")");
  }

  uint32_t u32le(const char* what) {
    require(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }

  double f64le(const char* what) {
    require(8, what);
    uint64_t b = 0;
    for (int i = 0; i < 8; ++i)
      b |= static_cast<uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 8;
    return std::bit_cast<double>(b);
  }

  void expect_magic(const char* magic, const char* what) {
    const size_t n = std::char_traits<char>::length(magic);
    require(n, what);
    if (bytes.compare(pos, n, magic) != 0)
      throw std::runtime_error(context + ": bad magic, expected \"" + magic + "\"");
    pos += n;
  }
};

/// Shortest decimal form that round-trips a double exactly.
inline std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace diffseg::detail

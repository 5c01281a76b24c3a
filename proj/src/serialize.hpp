#pragma once

// Little-endian stream helpers shared by the NETV/ENSV blobs.

#include "kgens/error.hpp"

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

namespace kgens::detail {

inline void write_le(std::ostream& out, std::uint64_t value, int bytes) {
  for (int i = 0; i < bytes; ++i) out.put(static_cast<char>((value >> (8 * i)) & 0xFF));
}

inline std::uint64_t read_le(std::istream& in, int bytes) {
  std::uint64_t value = 0;
  for (int i = 0; i < bytes; ++i) {
    const int ch = in.get();
    if (ch == std::char_traits<char>::eof()) fail(ErrorKind::Truncated, "unexpected end of blob");
    value |= static_cast<std::uint64_t>(static_cast<unsigned char>(ch)) << (8 * i);
  }
  return value;
}

inline void write_u8(std::ostream& out, std::uint8_t v) { write_le(out, v, 1); }
inline void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v, 4); }
inline void write_u64(std::ostream& out, std::uint64_t v) { write_le(out, v, 8); }
inline void write_f32(std::ostream& out, float v) { write_le(out, std::bit_cast<std::uint32_t>(v), 4); }
inline void write_f64(std::ostream& out, double v) { write_le(out, std::bit_cast<std::uint64_t>(v), 8); }

inline std::uint8_t read_u8(std::istream& in) { return static_cast<std::uint8_t>(read_le(in, 1)); }
inline std::uint32_t read_u32(std::istream& in) { return static_cast<std::uint32_t>(read_le(in, 4)); }
inline std::uint64_t read_u64(std::istream& in) { return read_le(in, 8); }
inline float read_f32(std::istream& in) { return std::bit_cast<float>(static_cast<std::uint32_t>(read_le(in, 4))); }
inline double read_f64(std::istream& in) { return std::bit_cast<double>(read_le(in, 8)); }

inline void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
  const auto size = read_u32(in);
  require(size < (1u << 20), ErrorKind::Parse, "string field too long");
  std::string s(size, '\0');
  in.read(s.data(), size);
  if (static_cast<std::uint32_t>(in.gcount()) != size) fail(ErrorKind::Truncated, "unexpected end of blob");
  return s;
}

inline void expect_magic(std::istream& in, const char (&magic)[5]) {
  char buf[4] = {};
  in.read(buf, 4);
  if (in.gcount() != 4) fail(ErrorKind::Truncated, "blob shorter than its magic");
  for (int i = 0; i < 4; ++i)
    if (buf[i] != magic[i]) fail(ErrorKind::BadMagic, std::string("expected ") + magic);
}

} // namespace kgens::detail

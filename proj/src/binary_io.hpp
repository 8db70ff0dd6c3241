#pragma once

// Little-endian 64-bit word IO shared by the snapshot and Brownian formats.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string_view>

#include "lakesim/error.hpp"

namespace lakesim::detail {

inline void write_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out.write(bytes.data(), 8);
}

inline void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

/// Magic strings are stored as their ASCII bytes zero-padded to one word.
inline void write_magic(std::ostream& out, std::string_view magic) {
  std::array<char, 8> bytes{};
  std::memcpy(bytes.data(), magic.data(), magic.size());
  out.write(bytes.data(), 8);
}

inline std::uint64_t read_u64(std::istream& in, const char* what) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (in.gcount() != 8) throw Error(ErrorCode::format_error, std::string("truncated file while reading ") + what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

inline double read_f64(std::istream& in, const char* what) {
  return std::bit_cast<double>(read_u64(in, what));
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  std::array<char, 8> bytes{};
  in.read(bytes.data(), 8);
  std::array<char, 8> want{};
  std::memcpy(want.data(), magic.data(), magic.size());
  if (in.gcount() != 8 || bytes != want) {
    throw Error(ErrorCode::format_error, "bad magic: expected \"" + std::string(magic) + "\"");
  }
}

}  // namespace lakesim::detail

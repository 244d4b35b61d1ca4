#pragma once

// Little-endian helpers shared by the file formats.

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string_view>

#include "mub6/core.hpp"

namespace mub6::detail {

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

/// Returns false on short read.
template <typename T>
bool get_le(std::istream& in, T& value) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) return false;
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
  value = static_cast<T>(v);
  return true;
}

inline void put_vec(std::ostream& out, const DiscVec& v) {
  for (Bin b : v.bins) put_le<std::uint16_t>(out, b);
}

inline bool get_vec(std::istream& in, DiscVec& v) {
  for (auto& b : v.bins) {
    if (!get_le(in, b)) return false;
  }
  return true;
}

inline void put_core(std::ostream& out, const DiscMat& m) {
  for (Bin b : m.core()) put_le<std::uint16_t>(out, b);
}

inline bool get_core(std::istream& in, DiscMat& m) {
  std::array<Bin, 25> core{};
  for (auto& b : core) {
    if (!get_le(in, b)) return false;
  }
  m = DiscMat::from_core(core);
  return true;
}

inline bool read_magic(std::istream& in, std::string_view magic) {
  std::array<char, 8> buf{};
  if (!in.read(buf.data(), 8)) return false;
  return std::string_view(buf.data(), 8) == magic;
}

}  // namespace mub6::detail

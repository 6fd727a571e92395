#pragma once

// Little-endian primitive encoding shared by the checkpoint and scene formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace ragc::le {

template <typename U>
void put_uint(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename U>
U get_uint(std::string_view in, std::size_t offset) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return value;
}

inline void put_f32(std::string& out, float v) {
  put_uint<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
}
inline void put_f64(std::string& out, double v) {
  put_uint<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
}
inline float get_f32(std::string_view in, std::size_t offset) {
  return std::bit_cast<float>(get_uint<std::uint32_t>(in, offset));
}
inline double get_f64(std::string_view in, std::size_t offset) {
  return std::bit_cast<double>(get_uint<std::uint64_t>(in, offset));
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace ragc::le

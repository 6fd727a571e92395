#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ragc/tensor.hpp"

namespace ragc {

/// Checkpoint layout (all integers and floats little-endian):
///
///   bytes 0..7   magic "RAGCCKPT"
///   u32          format version (kCheckpointVersion)
///   u32          entry count
///   per entry, in order:
///     u32        name length L
///     L bytes    UTF-8 name
///     u32        rank R
///     R × u64    extents
///     prod × f64 values, row-major
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

std::string encode_checkpoint(const std::vector<NamedArray>& entries);
std::vector<NamedArray> decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const std::vector<NamedArray>& entries);
std::vector<NamedArray> load_checkpoint(const std::string& path);

}  // namespace ragc

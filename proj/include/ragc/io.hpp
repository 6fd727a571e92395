#pragma once

#include <string>
#include <variant>
#include <vector>

#include "ragc/pointcloud.hpp"

namespace ragc {

/// Depth capture file:
///
///   line 1   "RAGC-DEPTH 1"
///   line 2   "<width> <height> <fx> <fy> <cx> <cy> <label>"
///   payload  width·height little-endian float32 depths in meters, row-major,
///            0 = invalid
///
/// Point cloud file:
///
///   line 1   "RAGC-PC 1"
///   line 2   "<count> <label>"
///   payload  count × 3 little-endian float32 (x, y, z) in meters
///
/// Lines end with a single '\n'. Numbers in line 2 are ASCII decimal;
/// label -1 means unlabeled.
inline constexpr const char* kCaptureMagic = "RAGC-DEPTH 1";
inline constexpr const char* kCloudMagic = "RAGC-PC 1";

using SceneData = std::variant<DepthImage, PointCloud>;

std::string encode_capture(const DepthImage& img);
std::string encode_cloud(const PointCloud& pc);
/// Format detected from the magic line; strict validation.
SceneData decode_scene(const std::string& bytes);

void write_capture_file(const std::string& path, const DepthImage& img);
void write_cloud_file(const std::string& path, const PointCloud& pc);
SceneData parse_scene_file(const std::string& path);

/// Cloud ready for the network: captures go through preprocess_capture.
PointCloud load_scene_cloud(const std::string& path);

/// A directory of scene files plus a manifest `index.tsv`:
///   header "file\tlabel\tclass", then one row per file (relative path,
///   integer label, class name).
struct Dataset {
  std::vector<PointCloud> clouds;
  std::vector<std::string> files;
  std::vector<std::string> class_names;
};

inline constexpr const char* kManifestName = "index.tsv";

void write_dataset(const std::string& dir, const Dataset& data);
Dataset load_dataset(const std::string& dir);

}  // namespace ragc

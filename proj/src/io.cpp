#include "ragc/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ragc/binary_io.hpp"
#include "ragc/config_text.hpp"
#include "ragc/error.hpp"

namespace ragc {

namespace {

struct Header {
  std::string magic;
  std::vector<std::string> fields;
  std::size_t payload_offset = 0;
};

Header split_header(const std::string& bytes) {
  Header h;
  const auto nl1 = bytes.find('\n');
  if (nl1 == std::string::npos) throw FormatError("unsupported format: no header line");
  h.magic = bytes.substr(0, nl1);
  if (h.magic != kCaptureMagic && h.magic != kCloudMagic) {
    throw FormatError("unsupported format: unknown magic '" + h.magic.substr(0, 32) + "'");
  }
  const auto nl2 = bytes.find('\n', nl1 + 1);
  if (nl2 == std::string::npos) throw FormatError("corrupt file: header line 2 is not terminated");
  std::istringstream fields(bytes.substr(nl1 + 1, nl2 - nl1 - 1));
  std::string tok;
  while (fields >> tok) h.fields.push_back(tok);
  h.payload_offset = nl2 + 1;
  return h;
}

int parse_label(const std::string& s) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size() || v < -1) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("corrupt file: bad label field '" + s + "'");
  }
}

void check_payload(const Header& h, std::size_t total, std::size_t expected) {
  const std::size_t actual = total - h.payload_offset;
  if (actual != expected) {
    throw FormatError("corrupt file: payload starting at byte offset " +
                      std::to_string(h.payload_offset) + " should be " +
                      std::to_string(expected) + " bytes, found " + std::to_string(actual));
  }
}

}  // namespace

std::string encode_capture(const DepthImage& img) {
  if (img.depth.size() != img.width * img.height) {
    throw DimensionError("depth image size does not match width x height");
  }
  std::string out = std::string(kCaptureMagic) + '\n';
  out += std::to_string(img.width) + ' ' + std::to_string(img.height) + ' ' +
         text::format_double(img.intrinsics.fx) + ' ' + text::format_double(img.intrinsics.fy) +
         ' ' + text::format_double(img.intrinsics.cx) + ' ' +
         text::format_double(img.intrinsics.cy) + ' ' + std::to_string(img.label) + '\n';
  out.reserve(out.size() + 4 * img.depth.size());
  for (float d : img.depth) le::put_f32(out, d);
  return out;
}

std::string encode_cloud(const PointCloud& pc) {
  std::string out = std::string(kCloudMagic) + '\n';
  out += std::to_string(pc.size()) + ' ' + std::to_string(pc.label.value_or(-1)) + '\n';
  out.reserve(out.size() + 12 * pc.size());
  for (const auto& p : pc.points) {
    le::put_f32(out, static_cast<float>(p.x));
    le::put_f32(out, static_cast<float>(p.y));
    le::put_f32(out, static_cast<float>(p.z));
  }
  return out;
}

SceneData decode_scene(const std::string& bytes) {
  const Header h = split_header(bytes);
  if (h.magic == kCaptureMagic) {
    if (h.fields.size() != 7) {
      throw FormatError("corrupt file: capture header needs 7 fields, found " +
                        std::to_string(h.fields.size()));
    }
    DepthImage img;
    try {
      img.width = text::parse_size("width", h.fields[0]);
      img.height = text::parse_size("height", h.fields[1]);
      img.intrinsics = {text::parse_double("fx", h.fields[2]), text::parse_double("fy", h.fields[3]),
                        text::parse_double("cx", h.fields[4]), text::parse_double("cy", h.fields[5])};
    } catch (const ConfigError& e) {
      throw FormatError(std::string("corrupt file: ") + e.what());
    }
    img.label = parse_label(h.fields[6]);
    if (img.width == 0 || img.height == 0) throw FormatError("corrupt file: zero image extent");
    if (!(img.intrinsics.fx > 0.0 && img.intrinsics.fy > 0.0)) {
      throw FormatError("corrupt file: focal lengths must be positive");
    }
    const std::size_t n = img.width * img.height;
    check_payload(h, bytes.size(), 4 * n);
    img.depth.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const float d = le::get_f32(bytes, h.payload_offset + 4 * i);
      if (!std::isfinite(d) || d < 0.0f) {
        throw DataError("invalid depth value at pixel index " + std::to_string(i));
      }
      img.depth[i] = d;
    }
    return img;
  }

  if (h.fields.size() != 2) {
    throw FormatError("corrupt file: cloud header needs 2 fields, found " +
                      std::to_string(h.fields.size()));
  }
  PointCloud pc;
  std::size_t n = 0;
  try {
    n = text::parse_size("count", h.fields[0]);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("corrupt file: ") + e.what());
  }
  const int label = parse_label(h.fields[1]);
  if (label >= 0) pc.label = label;
  check_payload(h, bytes.size(), 12 * n);
  pc.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = h.payload_offset + 12 * i;
    const Vec3 p{le::get_f32(bytes, at), le::get_f32(bytes, at + 4), le::get_f32(bytes, at + 8)};
    if (!p.finite()) throw DataError("non-finite coordinate at point index " + std::to_string(i));
    pc.points[i] = p;
  }
  return pc;
}

void write_capture_file(const std::string& path, const DepthImage& img) {
  le::write_file(path, encode_capture(img));
}

void write_cloud_file(const std::string& path, const PointCloud& pc) {
  le::write_file(path, encode_cloud(pc));
}

SceneData parse_scene_file(const std::string& path) {
  return decode_scene(le::read_file(path));
}

PointCloud load_scene_cloud(const std::string& path) {
  auto scene = parse_scene_file(path);
  if (auto* img = std::get_if<DepthImage>(&scene)) return preprocess_capture(*img);
  auto pc = std::get<PointCloud>(std::move(scene));
  if (pc.empty()) throw DataError("point cloud file '" + path + "' holds no points");
  return pc;
}

void write_dataset(const std::string& dir, const Dataset& data) {
  std::filesystem::create_directories(dir);
  if (data.files.size() != data.clouds.size()) {
    throw DimensionError("dataset file list and cloud list differ in length");
  }
  std::ostringstream manifest;
  manifest << "file\tlabel\tclass\n";
  for (std::size_t i = 0; i < data.clouds.size(); ++i) {
    const auto& pc = data.clouds[i];
    write_cloud_file((std::filesystem::path(dir) / data.files[i]).string(), pc);
    const int label = pc.label.value_or(-1);
    const std::string name = label >= 0 && static_cast<std::size_t>(label) < data.class_names.size()
                                 ? data.class_names[label]
                                 : "";
    manifest << data.files[i] << '\t' << label << '\t' << name << '\n';
  }
  le::write_file((std::filesystem::path(dir) / kManifestName).string(), manifest.str());
}

Dataset load_dataset(const std::string& dir) {
  const auto manifest_path = (std::filesystem::path(dir) / kManifestName).string();
  std::ifstream in(manifest_path);
  if (!in) throw Error("dataset manifest '" + manifest_path + "' not found");
  Dataset data;
  std::string line;
  std::getline(in, line);
  if (line.rfind("file\tlabel", 0) != 0) {
    throw FormatError("dataset manifest '" + manifest_path + "' has an unexpected header");
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() < 2) {
      throw FormatError("manifest row " + std::to_string(row) + " needs file and label columns");
    }
    const int label = parse_label(cols[1]);
    PointCloud pc = load_scene_cloud((std::filesystem::path(dir) / cols[0]).string());
    if (label >= 0) {
      pc.label = label;
      if (data.class_names.size() <= static_cast<std::size_t>(label)) {
        data.class_names.resize(label + 1);
      }
      if (cols.size() > 2 && !cols[2].empty()) data.class_names[label] = cols[2];
    }
    data.clouds.push_back(std::move(pc));
    data.files.push_back(cols[0]);
  }
  for (std::size_t c = 0; c < data.class_names.size(); ++c) {
    if (data.class_names[c].empty()) data.class_names[c] = "class" + std::to_string(c);
  }
  return data;
}

}  // namespace ragc

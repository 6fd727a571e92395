#include "ragc/pointcloud.hpp"

#include <numbers>
#include <string>

#include "ragc/error.hpp"

namespace ragc {

namespace {
void validate_intrinsics(const CameraIntrinsics& k) {
  if (!(k.fx > 0.0 && k.fy > 0.0) || !std::isfinite(k.cx) || !std::isfinite(k.cy)) {
    throw ConfigError("camera intrinsics need positive focal lengths and a finite principal point");
  }
}
}  // namespace

PointCloud project_depth_map(const DepthImage& img) {
  validate_intrinsics(img.intrinsics);
  if (img.depth.size() != img.width * img.height) {
    throw DimensionError("depth image " + std::to_string(img.width) + "x" +
                         std::to_string(img.height) + " carries " +
                         std::to_string(img.depth.size()) + " samples");
  }
  const auto& k = img.intrinsics;
  PointCloud pc;
  if (img.label >= 0) pc.label = img.label;
  for (std::size_t v = 0; v < img.height; ++v) {
    for (std::size_t u = 0; u < img.width; ++u) {
      const double z = img.depth[v * img.width + u];
      if (!(z > 0.0)) continue;
      pc.points.push_back({(static_cast<double>(u) - k.cx) * z / k.fx,
                           (static_cast<double>(v) - k.cy) * z / k.fy, z});
    }
  }
  if (pc.empty()) throw DataError("depth image has no valid pixels; point cloud is empty");
  return pc;
}

DepthImage center_crop(const DepthImage& img, std::size_t width, std::size_t height) {
  if (img.width < width || img.height < height) {
    throw DimensionError("image " + std::to_string(img.width) + "x" +
                         std::to_string(img.height) + " is smaller than the " +
                         std::to_string(width) + "x" + std::to_string(height) + " crop");
  }
  const std::size_t ox = (img.width - width) / 2;
  const std::size_t oy = (img.height - height) / 2;
  DepthImage out;
  out.width = width;
  out.height = height;
  out.label = img.label;
  out.intrinsics = img.intrinsics;
  out.intrinsics.cx -= static_cast<double>(ox);
  out.intrinsics.cy -= static_cast<double>(oy);
  out.depth.resize(width * height);
  for (std::size_t v = 0; v < height; ++v) {
    for (std::size_t u = 0; u < width; ++u) {
      out.depth[v * width + u] = img.depth[(v + oy) * img.width + (u + ox)];
    }
  }
  return out;
}

DepthImage downsample(const DepthImage& img, std::size_t stride) {
  if (stride == 0) throw ConfigError("downsample stride must be positive");
  DepthImage out;
  out.width = (img.width + stride - 1) / stride;
  out.height = (img.height + stride - 1) / stride;
  out.label = img.label;
  const double s = static_cast<double>(stride);
  out.intrinsics = {img.intrinsics.fx / s, img.intrinsics.fy / s,
                    img.intrinsics.cx / s, img.intrinsics.cy / s};
  out.depth.resize(out.width * out.height);
  for (std::size_t v = 0; v < out.height; ++v) {
    for (std::size_t u = 0; u < out.width; ++u) {
      out.depth[v * out.width + u] = img.depth[(v * stride) * img.width + u * stride];
    }
  }
  return out;
}

PointCloud preprocess_capture(const DepthImage& img) {
  validate_intrinsics(img.intrinsics);
  return project_depth_map(
      downsample(center_crop(img, kCropWidth, kCropHeight), kDownsampleStride));
}

Vec3 centroid(const std::vector<Vec3>& points) {
  Vec3 c;
  if (points.empty()) return c;
  for (const auto& p : points) c = c + p;
  return c * (1.0 / static_cast<double>(points.size()));
}

void rotate_about_vertical(PointCloud& pc, double angle) {
  const Vec3 c = centroid(pc.points);
  const double cs = std::cos(angle), sn = std::sin(angle);
  for (auto& p : pc.points) {
    const Vec3 d = p - c;
    p = c + Vec3{cs * d.x + sn * d.z, d.y, -sn * d.x + cs * d.z};
  }
}

void mirror_horizontal(PointCloud& pc) {
  const Vec3 c = centroid(pc.points);
  for (auto& p : pc.points) p.x = 2.0 * c.x - p.x;
}

PointCloud augment_cloud(const PointCloud& pc, std::mt19937_64& rng,
                         const AugmentConfig& cfg) {
  PointCloud out = pc;
  if (out.empty()) return out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double angle = cfg.fixed_angle ? *cfg.fixed_angle
                                       : (cfg.rotate ? unit(rng) * 2.0 * std::numbers::pi : 0.0);
  if (angle != 0.0) rotate_about_vertical(out, angle);

  if (cfg.mirror_probability > 0.0 && unit(rng) < cfg.mirror_probability) {
    mirror_horizontal(out);
  }

  if (cfg.removal_probability > 0.0) {
    std::vector<Vec3> kept;
    kept.reserve(out.points.size());
    for (const auto& p : out.points) {
      if (unit(rng) >= cfg.removal_probability) kept.push_back(p);
    }
    if (kept.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, out.points.size() - 1);
      kept.push_back(out.points[pick(rng)]);
    }
    out.points = std::move(kept);
  }
  return out;
}

}  // namespace ragc

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <vector>

namespace ragc {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
  double squared_norm() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(squared_norm()); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline double squared_distance(const Vec3& a, const Vec3& b) {
  return (a - b).squared_norm();
}

/// Pinhole intrinsics in pixels.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

/// Row-major depth map in meters; 0 marks an invalid pixel.
struct DepthImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> depth;
  CameraIntrinsics intrinsics;
  int label = -1;

  float at(std::size_t u, std::size_t v) const { return depth[v * width + u]; }
};

/// Points in meters in the camera frame (y is the vertical axis).
struct PointCloud {
  std::vector<Vec3> points;
  std::optional<int> label;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

inline constexpr std::size_t kCropWidth = 560;
inline constexpr std::size_t kCropHeight = 400;
inline constexpr std::size_t kDownsampleStride = 8;

/// x = (u - cx) z / fx, y = (v - cy) z / fy for every pixel with z > 0, in
/// row-major scan order.
PointCloud project_depth_map(const DepthImage& img);

/// Centered crop; the principal point moves by the crop offset.
DepthImage center_crop(const DepthImage& img, std::size_t width, std::size_t height);

/// Keeps the top-left pixel of every stride×stride block. Intrinsics are
/// rescaled so projection of the kept pixels is unchanged.
DepthImage downsample(const DepthImage& img, std::size_t stride);

/// Center crop to 560×400, stride-8 subsampling (70×50 = 3500 pixels), then
/// projection.
PointCloud preprocess_capture(const DepthImage& img);

struct AugmentConfig {
  bool rotate = true;
  double mirror_probability = 0.5;
  double removal_probability = 0.2;
  /// Overrides the random rotation angle (radians) when set.
  std::optional<double> fixed_angle;
};

Vec3 centroid(const std::vector<Vec3>& points);

/// Rotation by `angle` about the vertical (y) axis through the centroid.
void rotate_about_vertical(PointCloud& pc, double angle);

/// Negates the horizontal (x) coordinate relative to the centroid.
void mirror_horizontal(PointCloud& pc);

/// Training-time augmentation: random rotation about the vertical axis,
/// random mirror, random point removal (at least one point always survives).
PointCloud augment_cloud(const PointCloud& pc, std::mt19937_64& rng,
                         const AugmentConfig& cfg = {});

}  // namespace ragc

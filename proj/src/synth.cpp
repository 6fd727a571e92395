#include "ragc/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "ragc/error.hpp"

namespace ragc {

namespace {

// Local scene frame: (a, b) horizontal, u up from the floor.
struct Local {
  double a, u, b;
};

struct Box {
  double a0, a1, b0, b1, h;
  bool covers(double a, double b) const { return a >= a0 && a <= a1 && b >= b0 && b <= b1; }
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void floor_points(std::vector<Local>& out, std::size_t n, double half, std::mt19937_64& rng,
                  const std::vector<Box>& holes = {}) {
  while (n > 0) {
    const double a = uniform(rng, -half, half);
    const double b = uniform(rng, -half, half);
    bool hidden = false;
    for (const auto& box : holes) hidden = hidden || box.covers(a, b);
    if (hidden) continue;
    out.push_back({a, 0.0, b});
    --n;
  }
}

std::vector<Box> place_boxes(std::size_t count, double half, std::mt19937_64& rng) {
  std::vector<Box> boxes;
  for (int attempt = 0; boxes.size() < count && attempt < 200; ++attempt) {
    const double w = uniform(rng, 0.6, 1.0);
    const double d = uniform(rng, 0.6, 1.0);
    const double ca = uniform(rng, -half + 0.55, half - 0.55);
    const double cb = uniform(rng, -half + 0.55, half - 0.55);
    Box box{ca - w / 2, ca + w / 2, cb - d / 2, cb + d / 2, uniform(rng, 0.5, 0.9)};
    bool clash = false;
    for (const auto& o : boxes) {
      clash = clash || !(box.a1 + 0.1 < o.a0 || o.a1 + 0.1 < box.a0 || box.b1 + 0.1 < o.b0 ||
                         o.b1 + 0.1 < box.b0);
    }
    if (!clash) boxes.push_back(box);
  }
  return boxes;
}

void box_points(std::vector<Local>& out, const Box& box, std::size_t n, std::mt19937_64& rng) {
  const double w = box.a1 - box.a0;
  const double d = box.b1 - box.b0;
  const double areas[5] = {w * d, w * box.h, w * box.h, d * box.h, d * box.h};
  std::discrete_distribution<int> face(std::begin(areas), std::end(areas));
  for (std::size_t i = 0; i < n; ++i) {
    const double a = uniform(rng, box.a0, box.a1);
    const double b = uniform(rng, box.b0, box.b1);
    const double u = uniform(rng, 0.0, box.h);
    switch (face(rng)) {
      case 0: out.push_back({a, box.h, b}); break;
      case 1: out.push_back({a, u, box.b0}); break;
      case 2: out.push_back({a, u, box.b1}); break;
      case 3: out.push_back({box.a0, u, b}); break;
      default: out.push_back({box.a1, u, b}); break;
    }
  }
}

void sphere_points(std::vector<Local>& out, Local center, double radius, std::size_t n,
                   std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double x = g(rng), y = g(rng), z = g(rng);
    const double len = std::sqrt(x * x + y * y + z * z);
    if (len < 1e-12) {
      --i;
      continue;
    }
    out.push_back({center.a + radius * x / len, center.u + radius * y / len,
                   center.b + radius * z / len});
  }
}

std::size_t object_share(std::size_t n) { return n / 2; }

}  // namespace

PointCloud synthesize_scene(int label, std::uint64_t seed, const SynthConfig& cfg) {
  if (label < 0 || label > 3) throw LabelError("synthetic label must be in [0, 4)");
  if (cfg.points < 8 || cfg.point_spread >= cfg.points) {
    throw ConfigError("synthetic point count must be >= 8 and exceed its spread");
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(label)};
  std::mt19937_64 rng(seq);

  const auto spread = static_cast<long>(cfg.point_spread);
  const std::size_t n =
      cfg.points + std::uniform_int_distribution<long>(-spread, spread)(rng);
  const double half = cfg.half_extent;

  std::vector<Local> local;
  local.reserve(n);
  switch (label) {
    case 0:
      floor_points(local, n, half, rng);
      break;
    case 1: {
      const auto boxes = place_boxes(std::uniform_int_distribution<int>(1, 3)(rng), half, rng);
      const std::size_t on_objects = object_share(n);
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        const std::size_t share =
            on_objects / boxes.size() + (i < on_objects % boxes.size() ? 1 : 0);
        box_points(local, boxes[i], share, rng);
      }
      floor_points(local, n - on_objects, half, rng, boxes);
      break;
    }
    case 2: {
      // small spheres resting on the floor, not touching each other
      const int wanted = std::uniform_int_distribution<int>(3, 5)(rng);
      std::vector<Local> centers;
      std::vector<double> radii;
      for (int attempt = 0; static_cast<int>(centers.size()) < wanted && attempt < 200; ++attempt) {
        const double r = uniform(rng, 0.18, 0.3);
        const Local c{uniform(rng, -half + 0.35, half - 0.35), r,
                      uniform(rng, -half + 0.35, half - 0.35)};
        bool clash = false;
        for (std::size_t k = 0; k < centers.size(); ++k) {
          const double da = c.a - centers[k].a, db = c.b - centers[k].b;
          clash = clash || std::sqrt(da * da + db * db) < r + radii[k] + 0.1;
        }
        if (clash) continue;
        centers.push_back(c);
        radii.push_back(r);
      }
      const std::size_t on_objects = object_share(n);
      for (std::size_t i = 0; i < centers.size(); ++i) {
        const std::size_t share =
            on_objects / centers.size() + (i < on_objects % centers.size() ? 1 : 0);
        sphere_points(local, centers[i], radii[i], share, rng);
      }
      floor_points(local, n - on_objects, half, rng);
      break;
    }
    default: {
      const double height = 1.6 * half;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = uniform(rng, -half, half);
        const double u = uniform(rng, 0.0, height);
        if (i % 2 == 0) {
          local.push_back({t, u, -half});
        } else {
          local.push_back({-half, u, t});
        }
      }
      break;
    }
  }

  const double yaw = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double scale = uniform(rng, 0.85, 1.15);
  const double tx = uniform(rng, -0.3, 0.3);
  const double ty = uniform(rng, 1.0, 1.5);
  const double tz = uniform(rng, 2.6, 3.4);
  const double c = std::cos(yaw), s = std::sin(yaw);

  PointCloud pc;
  pc.label = label;
  pc.points.reserve(local.size());
  for (const auto& p : local) {
    const double j0 = uniform(rng, -cfg.jitter, cfg.jitter);
    const double j1 = uniform(rng, -cfg.jitter, cfg.jitter);
    const double j2 = uniform(rng, -cfg.jitter, cfg.jitter);
    // float-representable, so a cloud equals its file round trip
    const std::array<float, 3> v{static_cast<float>(scale * (c * p.a - s * p.b) + tx + j0),
                                 static_cast<float>(ty - scale * p.u + j1),
                                 static_cast<float>(scale * (s * p.a + c * p.b) + tz + j2)};
    pc.points.push_back({v[0], v[1], v[2]});
  }
  return pc;
}

Dataset generate_synthetic_dataset(std::size_t per_class, std::uint64_t seed,
                                   const SynthConfig& cfg) {
  Dataset data;
  data.class_names = synthetic_class_names();
  const std::size_t classes = data.class_names.size();
  const std::size_t total = per_class * classes;
  std::mt19937_64 seeds(seed);
  for (std::size_t i = 0; i < total; ++i) {
    const int label = static_cast<int>(i % classes);
    data.clouds.push_back(synthesize_scene(label, seeds(), cfg));
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%05zu.pc", i);
    data.files.emplace_back(name);
  }
  return data;
}

}  // namespace ragc

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ragc/agc.hpp"
#include "ragc/graph.hpp"
#include "ragc/nn.hpp"
#include "ragc/pool.hpp"

namespace ragc {

/// Declarative description of the classifier. Defaults:
///
///   AGC 16 → [pool, 2×RAGC 16] → [pool, 2×RAGC 32] → [pool, 2×RAGC 64]
///   → [pool, 2×RAGC 128] → pool → global average → FC 128 → FC classes
///
/// with graph radii {0.1, 0.15, 0.25, 0.35, 0.55, 0.55} m and pooling radii
/// {0.1, 0.15, 0.25, 0.35, 0.55} m.
struct NetworkConfig {
  std::size_t class_count = 4;
  EdgePolicy::Kind policy = EdgePolicy::Kind::kRadius;
  std::size_t knn_k = 9;
  EdgeAttrMode attr_mode = EdgeAttrMode::kSpherical;
  std::vector<std::size_t> filter_widths{16, 32};
  bool residual = true;
  bool post_add_relu = true;
  bool batch_norm = true;
  std::size_t initial_width = 16;
  std::vector<std::size_t> stage_widths{16, 32, 64, 128};
  std::size_t blocks_per_stage = 2;
  std::size_t fc_width = 128;
  std::vector<double> graph_radii{0.1, 0.15, 0.25, 0.35, 0.55, 0.55};
  std::vector<double> pool_radii{0.1, 0.15, 0.25, 0.35, 0.55};
  /// Multiplies every graph and pooling radius (scene-scale adaptation).
  double radius_scale = 1.0;
  PoolMode pool_mode = PoolMode::kMax;
  double dropout = 0.2;
  std::uint64_t seed = 1;

  std::size_t pooling_count() const { return stage_widths.size() + 1; }
  EdgePolicy edge_policy(std::size_t level) const;
  double pool_radius(std::size_t level) const { return pool_radii.at(level) * radius_scale; }
  void validate() const;
};

/// The key=value rendering shared by config files, checkpoints and logs.
std::map<std::string, std::string> to_key_values(const NetworkConfig& cfg);
/// Applies one key; returns false for keys that are not network keys.
bool apply_key_value(NetworkConfig& cfg, const std::string& key, const std::string& value);

/// Node count of every sample after graph init and after each pooling, from
/// the most recent forward pass.
using LevelNodeCounts = std::vector<std::vector<std::size_t>>;

class Network {
 public:
  Network(const NetworkConfig& cfg, std::mt19937_64& rng);
  /// Seeds the initializer from cfg.seed.
  explicit Network(const NetworkConfig& cfg);

  Network(Network&&) = default;
  Network& operator=(Network&&) = default;
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  const NetworkConfig& config() const { return cfg_; }

  /// Logits [B × classes]. Softmax is left to the loss / prediction path.
  Tensor forward(Tape& tape, std::span<const PointCloud> batch, Mode mode,
                 std::mt19937_64& rng);

  /// Class probabilities in eval mode, [B × classes].
  Tensor predict_proba(std::span<const PointCloud> batch);

  ParameterSet parameters();
  std::size_t parameter_count();

  /// One line per layer: name, output width, repeat count.
  std::vector<std::string> describe() const;
  const LevelNodeCounts& last_node_counts() const { return node_counts_; }

  AgcLayer& initial_conv() { return initial_conv_; }
  std::vector<std::vector<RagcBlock>>& stages() { return stages_; }

 private:
  Network(const NetworkConfig& cfg, std::mt19937_64 rng, int);

  NetworkConfig cfg_;
  AgcLayer initial_conv_;
  BatchNorm initial_bn_;
  std::vector<std::vector<RagcBlock>> stages_;
  Linear fc1_;
  Linear fc2_;
  LevelNodeCounts node_counts_;
};

/// build_network(cfg, rng)
inline Network build_network(const NetworkConfig& cfg, std::mt19937_64& rng) {
  return Network(cfg, rng);
}

/// network_forward(net, batch, mode, rng)
inline Tensor network_forward(Tape& tape, Network& net, std::span<const PointCloud> batch,
                              Mode mode, std::mt19937_64& rng) {
  return net.forward(tape, batch, mode, rng);
}

/// Writes the parameter checkpoint to `path` and the config to `path.cfg`.
void save_network(Network& net, const std::string& path);
Network load_network(const std::string& path);

std::string config_path_for(const std::string& checkpoint_path);
NetworkConfig read_network_config(const std::string& path);

}  // namespace ragc

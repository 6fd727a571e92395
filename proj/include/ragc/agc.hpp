#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "ragc/graph.hpp"
#include "ragc/nn.hpp"

namespace ragc {

/// FC/ReLU stack mapping an edge-attribute vector to a flattened
/// [d_out × d_in] weight matrix (row-major, output-major).
struct DynamicFilterNet {
  std::vector<Linear> hidden;
  Linear last;
  std::size_t attr_width = 0;
  std::size_t d_in = 0;
  std::size_t d_out = 0;

  static DynamicFilterNet init(std::size_t attr_width,
                               const std::vector<std::size_t>& hidden_widths,
                               std::size_t d_in, std::size_t d_out, std::mt19937_64& rng);

  /// Output of the hidden stack (after its last ReLU) for every edge, or the
  /// attributes themselves when there are no hidden layers.
  Tensor hidden_features(Tape& tape, const Tensor& edge_attrs) const;
  void collect(ParameterSet& set, const std::string& prefix);
};

/// Attention graph convolution:
///   X_i' = 1/|N(i)| Σ_{j ∈ N(i)} Θ_ji X_j + b,  Θ_ji = filter(attr_ji).
struct AgcLayer {
  DynamicFilterNet filter;
  Tensor bias;

  static AgcLayer init(std::size_t attr_width, const std::vector<std::size_t>& filter_widths,
                       std::size_t d_in, std::size_t d_out, std::mt19937_64& rng);

  std::size_t in_features() const { return filter.d_in; }
  std::size_t out_features() const { return filter.d_out; }

  /// Production path: never materializes Θ (see edge_conditioned_conv).
  Tensor forward(Tape& tape, const GeometricGraph& g, const Tensor& x) const;
  /// Reference path through the per-edge Θ tensor.
  Tensor forward_materialized(Tape& tape, const GeometricGraph& g, const Tensor& x) const;
  void collect(ParameterSet& set, const std::string& prefix);
};

/// Θ for every edge: [E × d_out·d_in].
Tensor dynamic_filter_weights(Tape& tape, const AgcLayer& layer, const Tensor& edge_attrs);

/// agc_forward(layer, g) on g.node_features.
inline Tensor agc_forward(Tape& tape, const AgcLayer& layer, const GeometricGraph& g) {
  return layer.forward(tape, g, g.node_features);
}

/// Fused AGC aggregation. With h_e the filter-net hidden output of edge e and
/// Θ_e = W^T h_e + c, the per-node mean of Θ_e X_src equals W and c applied
/// to the per-node mean of the outer products h_e ⊗ X_src, so the last
/// filter layer runs once per node instead of once per edge.
///
/// hidden [E×K], w_last [K × d_out·d_in], b_last [d_out·d_in], x [N×d_in],
/// bias [d_out]. Returns [N×d_out].
Tensor edge_conditioned_conv(Tape& tape, const GeometricGraph& g, const Tensor& hidden,
                             const Tensor& w_last, const Tensor& b_last, const Tensor& x,
                             const Tensor& bias);

/// out_i = 1/|N(i)| Σ_e Θ_e X_src(e) + bias with explicit theta
/// [E × d_out·d_in]. bias is optional.
Tensor filtered_mean_aggregate(Tape& tape, const GeometricGraph& g, const Tensor& theta,
                               const Tensor& x, const Tensor& bias = Tensor());

struct RagcOptions {
  /// Adds the projection shortcut P(x); off gives the plain stacked variant.
  bool residual = true;
  bool batch_norm = true;
  /// ReLU(F(x) + P(x)) when set, ReLU(F(x)) + P(x) otherwise.
  bool post_add_relu = true;
};

/// Two stacked AGC layers with a per-node linear projection shortcut:
///   y = ReLU(F(x) + P(x)),  F = AGC → BN → ReLU → AGC → BN.
struct RagcBlock {
  AgcLayer conv1;
  AgcLayer conv2;
  BatchNorm bn1;
  BatchNorm bn2;
  Linear projection;
  RagcOptions options;

  static RagcBlock init(std::size_t attr_width, const std::vector<std::size_t>& filter_widths,
                        std::size_t d_in, std::size_t d_out, const RagcOptions& options,
                        std::mt19937_64& rng);

  Tensor forward(Tape& tape, const GeometricGraph& g, const Tensor& x, Mode mode);
  void collect(ParameterSet& set, const std::string& prefix);
};

inline Tensor ragc_block_forward(Tape& tape, RagcBlock& block, const GeometricGraph& g,
                                 Mode mode) {
  return block.forward(tape, g, g.node_features, mode);
}

}  // namespace ragc

#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ragc/checkpoint.hpp"
#include "ragc/ops.hpp"
#include "ragc/tensor.hpp"

namespace ragc {

/// Named view of every learnable tensor and running-statistics buffer of a
/// module tree, in a stable order.
struct ParameterSet {
  std::vector<std::pair<std::string, Tensor>> params;
  std::vector<std::pair<std::string, BatchNormState*>> buffers;

  std::vector<Tensor> tensors() const;
  std::size_t scalar_count() const;

  std::vector<NamedArray> to_arrays() const;
  /// Copies values by name; throws FormatError on missing names or shape
  /// mismatch.
  void load_arrays(const std::vector<NamedArray>& arrays);
};

/// Fully connected layer; weight is [d_in × d_out].
struct Linear {
  Tensor weight;
  Tensor bias;

  /// Weights uniform in ±1/sqrt(d_in), zero bias.
  static Linear init(std::size_t d_in, std::size_t d_out, std::mt19937_64& rng);

  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
  Tensor forward(Tape& tape, const Tensor& x) const { return linear(tape, x, weight, bias); }
  void collect(ParameterSet& set, const std::string& prefix);
};

struct BatchNorm {
  Tensor gamma;
  Tensor beta;
  BatchNormState state;

  static BatchNorm init(std::size_t features);
  Tensor forward(Tape& tape, const Tensor& x, Mode mode) {
    return batch_norm(tape, x, gamma, beta, state, mode);
  }
  void collect(ParameterSet& set, const std::string& prefix);
};

}  // namespace ragc

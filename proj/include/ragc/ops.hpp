#pragma once

#include <cstddef>
#include <random>
#include <span>

#include "ragc/tensor.hpp"

namespace ragc {

enum class Mode { kTrain, kEval };

/// out = x·W + b with x [N×d_in], W [d_in×d_out], b [d_out] (b optional).
Tensor linear(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b);

/// Elementwise max(x, 0). The subgradient at 0 is 0.
Tensor relu(Tape& tape, const Tensor& x);

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);

/// Sum of all elements as a [1] tensor.
Tensor sum(Tape& tape, const Tensor& x);

/// Running statistics of a batch-norm layer.
struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  explicit BatchNormState(std::size_t features = 0)
      : running_mean(features, 0.0), running_var(features, 1.0) {}
};

/// Per-feature standardization over the row axis of x [N×d]. Training mode
/// uses biased batch statistics and updates `state`; eval mode reads it.
Tensor batch_norm(Tape& tape, const Tensor& x, const Tensor& gamma,
                  const Tensor& beta, BatchNormState& state, Mode mode);

/// Inverted dropout: survivors are scaled by 1/(1-p). Identity in eval mode.
Tensor dropout(Tape& tape, const Tensor& x, double p, Mode mode,
               std::mt19937_64& rng);

/// Mean over rows of -log softmax(logits)[target]. Returns a [1] tensor.
Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits,
                             std::span<const int> targets);

/// Row-wise softmax, not recorded.
Tensor softmax(const Tensor& logits);

/// Rows of x averaged per segment id; out has `segments` rows. Every segment
/// must be non-empty.
Tensor segment_mean(Tape& tape, const Tensor& x,
                    std::span<const std::size_t> segment_of_row,
                    std::size_t segments);

/// Elementwise max of x rows per segment. On ties the lowest row index wins
/// and receives the whole gradient.
Tensor segment_max(Tape& tape, const Tensor& x,
                   std::span<const std::size_t> segment_of_row,
                   std::size_t segments);

}  // namespace ragc

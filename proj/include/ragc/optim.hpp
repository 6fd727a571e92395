#pragma once

#include <cstdint>
#include <vector>

#include "ragc/tensor.hpp"

namespace ragc {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// L2 penalty added to the gradient before the moment updates.
  double weight_decay = 5e-4;
};

/// First/second moment estimates for one parameter.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

/// Bias-corrected ADAM over a fixed parameter list.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamOptions options = {});

  /// Applies one update from the gradients currently stored on the params.
  void step();
  void zero_grad();

  std::uint64_t steps() const { return step_; }
  const AdamOptions& options() const { return options_; }
  void set_lr(double lr) { options_.lr = lr; }
  const std::vector<AdamState>& state() const { return state_; }

 private:
  std::vector<Tensor> params_;
  std::vector<AdamState> state_;
  AdamOptions options_;
  std::uint64_t step_ = 0;
};

}  // namespace ragc

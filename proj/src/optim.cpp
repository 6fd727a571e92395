#include "ragc/optim.hpp"

#include <cmath>

#include "ragc/error.hpp"

namespace ragc {

Adam::Adam(std::vector<Tensor> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  if (!(options_.lr >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (!(options_.beta1 >= 0.0 && options_.beta1 < 1.0 && options_.beta2 >= 0.0 &&
        options_.beta2 < 1.0)) {
    throw ConfigError("ADAM betas must lie in [0, 1)");
  }
  state_.reserve(params_.size());
  for (const auto& p : params_) {
    state_.push_back({std::vector<double>(p.numel(), 0.0),
                      std::vector<double>(p.numel(), 0.0)});
  }
}

void Adam::step() {
  ++step_;
  const double t = static_cast<double>(step_);
  const double correction1 = 1.0 - std::pow(options_.beta1, t);
  const double correction2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t p = 0; p < params_.size(); ++p) {
    auto values = params_[p].mutable_values();
    const auto grad = params_[p].grad();
    auto& st = state_[p];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i] + options_.weight_decay * values[i];
      st.m[i] = options_.beta1 * st.m[i] + (1.0 - options_.beta1) * g;
      st.v[i] = options_.beta2 * st.v[i] + (1.0 - options_.beta2) * g * g;
      const double m_hat = st.m[i] / correction1;
      const double v_hat = st.v[i] / correction2;
      values[i] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace ragc

#include "ragc/nn.hpp"

#include <cmath>
#include <unordered_map>

#include "ragc/error.hpp"

namespace ragc {

std::vector<Tensor> ParameterSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& [name, t] : params) out.push_back(t);
  return out;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += t.numel();
  return n;
}

std::vector<NamedArray> ParameterSet::to_arrays() const {
  std::vector<NamedArray> out;
  for (const auto& [name, t] : params) {
    out.push_back({name, t.shape(), {t.values().begin(), t.values().end()}});
  }
  for (const auto& [name, st] : buffers) {
    const Shape shape{st->running_mean.size()};
    out.push_back({name + ".running_mean", shape, st->running_mean});
    out.push_back({name + ".running_var", shape, st->running_var});
  }
  return out;
}

void ParameterSet::load_arrays(const std::vector<NamedArray>& arrays) {
  std::unordered_map<std::string, const NamedArray*> by_name;
  for (const auto& a : arrays) by_name[a.name] = &a;
  const auto find = [&](const std::string& name, const Shape& shape) -> const NamedArray& {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError("checkpoint lacks entry '" + name + "'");
    if (it->second->shape != shape) {
      throw FormatError("checkpoint entry '" + name + "' has shape " +
                        shape_to_string(it->second->shape) + ", expected " +
                        shape_to_string(shape));
    }
    return *it->second;
  };
  for (auto& [name, t] : params) {
    const auto& a = find(name, t.shape());
    std::copy(a.values.begin(), a.values.end(), t.mutable_values().begin());
  }
  for (auto& [name, st] : buffers) {
    const Shape shape{st->running_mean.size()};
    st->running_mean = find(name + ".running_mean", shape).values;
    st->running_var = find(name + ".running_var", shape).values;
  }
}

Linear Linear::init(std::size_t d_in, std::size_t d_out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> w(d_in * d_out);
  for (auto& v : w) v = dist(rng);
  return {Tensor({d_in, d_out}, std::move(w), true), Tensor::zeros({d_out}, true)};
}

void Linear::collect(ParameterSet& set, const std::string& prefix) {
  set.params.emplace_back(prefix + ".weight", weight);
  set.params.emplace_back(prefix + ".bias", bias);
}

BatchNorm BatchNorm::init(std::size_t features) {
  return {Tensor::filled({features}, 1.0, true), Tensor::zeros({features}, true),
          BatchNormState(features)};
}

void BatchNorm::collect(ParameterSet& set, const std::string& prefix) {
  set.params.emplace_back(prefix + ".gamma", gamma);
  set.params.emplace_back(prefix + ".beta", beta);
  set.buffers.emplace_back(prefix, &state);
}

}  // namespace ragc

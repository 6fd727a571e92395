#include "ragc/agc.hpp"

#include <algorithm>

#include "ragc/error.hpp"
#include "ragc/parallel.hpp"

namespace ragc {

DynamicFilterNet DynamicFilterNet::init(std::size_t attr_width,
                                        const std::vector<std::size_t>& hidden_widths,
                                        std::size_t d_in, std::size_t d_out,
                                        std::mt19937_64& rng) {
  if (attr_width == 0 || d_in == 0 || d_out == 0) {
    throw ConfigError("filter network widths must be positive");
  }
  DynamicFilterNet net;
  net.attr_width = attr_width;
  net.d_in = d_in;
  net.d_out = d_out;
  std::size_t width = attr_width;
  for (auto h : hidden_widths) {
    if (h == 0) throw ConfigError("filter network hidden width must be positive");
    net.hidden.push_back(Linear::init(width, h, rng));
    width = h;
  }
  net.last = Linear::init(width, d_out * d_in, rng);
  return net;
}

Tensor DynamicFilterNet::hidden_features(Tape& tape, const Tensor& edge_attrs) const {
  if (edge_attrs.rank() != 2 || edge_attrs.dim(1) != attr_width) {
    throw ConfigError("edge attributes " + shape_to_string(edge_attrs.shape()) +
                      " do not match filter network input width " +
                      std::to_string(attr_width));
  }
  Tensor h = edge_attrs;
  for (const auto& layer : hidden) h = relu(tape, layer.forward(tape, h));
  return h;
}

void DynamicFilterNet::collect(ParameterSet& set, const std::string& prefix) {
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    hidden[i].collect(set, prefix + ".fc" + std::to_string(i));
  }
  last.collect(set, prefix + ".fc" + std::to_string(hidden.size()));
}

AgcLayer AgcLayer::init(std::size_t attr_width, const std::vector<std::size_t>& filter_widths,
                        std::size_t d_in, std::size_t d_out, std::mt19937_64& rng) {
  return {DynamicFilterNet::init(attr_width, filter_widths, d_in, d_out, rng),
          Tensor::zeros({d_out}, true)};
}

Tensor dynamic_filter_weights(Tape& tape, const AgcLayer& layer, const Tensor& edge_attrs) {
  const Tensor h = layer.filter.hidden_features(tape, edge_attrs);
  return layer.filter.last.forward(tape, h);
}

Tensor AgcLayer::forward(Tape& tape, const GeometricGraph& g, const Tensor& x) const {
  const Tensor h = filter.hidden_features(tape, g.edge_attrs);
  return edge_conditioned_conv(tape, g, h, filter.last.weight, filter.last.bias, x, bias);
}

Tensor AgcLayer::forward_materialized(Tape& tape, const GeometricGraph& g,
                                      const Tensor& x) const {
  const Tensor theta = dynamic_filter_weights(tape, *this, g.edge_attrs);
  return filtered_mean_aggregate(tape, g, theta, x, bias);
}

void AgcLayer::collect(ParameterSet& set, const std::string& prefix) {
  filter.collect(set, prefix + ".filter");
  set.params.emplace_back(prefix + ".bias", bias);
}

namespace {

void check_conv_inputs(const GeometricGraph& g, const Tensor& x, std::size_t d_in) {
  if (x.rank() != 2 || x.dim(0) != g.node_count() || x.dim(1) != d_in) {
    throw DimensionError("node features " + shape_to_string(x.shape()) + " do not match " +
                         std::to_string(g.node_count()) + " nodes of width " +
                         std::to_string(d_in));
  }
  if (g.in_offsets.size() != g.node_count() + 1) {
    throw StructuralError("graph adjacency offsets do not match the node count");
  }
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (g.in_degree(i) == 0) {
      throw StructuralError("node " + std::to_string(i) +
                            " has zero in-degree; every node needs its self-loop");
    }
  }
}

}  // namespace

Tensor edge_conditioned_conv(Tape& tape, const GeometricGraph& g, const Tensor& hidden,
                             const Tensor& w_last, const Tensor& b_last, const Tensor& x,
                             const Tensor& bias) {
  const std::size_t n = g.node_count();
  const std::size_t d_in = x.rank() == 2 ? x.dim(1) : 0;
  const std::size_t d_out = bias.numel();
  check_conv_inputs(g, x, d_in);
  if (hidden.rank() != 2 || hidden.dim(0) != g.edge_count()) {
    throw DimensionError("filter features " + shape_to_string(hidden.shape()) +
                         " do not match " + std::to_string(g.edge_count()) + " edges");
  }
  const std::size_t k_dim = hidden.dim(1);
  const std::size_t width = d_out * d_in;
  if (w_last.rank() != 2 || w_last.dim(0) != k_dim || w_last.dim(1) != width ||
      b_last.numel() != width) {
    throw DimensionError("filter output layer " + shape_to_string(w_last.shape()) +
                         " cannot produce " + std::to_string(d_out) + "x" +
                         std::to_string(d_in) + " weights from " + std::to_string(k_dim) +
                         " features");
  }
  // Row k < K of S_i holds Σ_e h_e[k] X_src / deg; row K holds Σ_e X_src / deg
  // and pairs with the filter output bias.
  const std::size_t rows = k_dim + 1;
  const std::size_t stride = rows * d_in;
  std::vector<double> summary(n * stride, 0.0);
  std::vector<double> out(n * d_out);
  {
    const auto hv = hidden.values();
    const auto xv = x.values();
    const auto wv = w_last.values();
    const auto bl = b_last.values();
    const auto bv = bias.values();
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        double* s = summary.data() + i * stride;
        double* s_bias = s + k_dim * d_in;
        for (auto e = g.in_offsets[i]; e < g.in_offsets[i + 1]; ++e) {
          const double* xj = xv.data() + g.sources[e] * d_in;
          const double* he = hv.data() + e * k_dim;
          for (std::size_t k = 0; k < k_dim; ++k) {
            const double hk = he[k];
            double* sk = s + k * d_in;
            for (std::size_t c = 0; c < d_in; ++c) sk[c] += hk * xj[c];
          }
          for (std::size_t c = 0; c < d_in; ++c) s_bias[c] += xj[c];
        }
        const double inv_deg = 1.0 / static_cast<double>(g.in_degree(i));
        for (std::size_t q = 0; q < stride; ++q) s[q] *= inv_deg;

        double* o = out.data() + i * d_out;
        std::copy(bv.begin(), bv.end(), o);
        for (std::size_t k = 0; k < rows; ++k) {
          const double* sk = s + k * d_in;
          const double* wk = k < k_dim ? wv.data() + k * width : bl.data();
          for (std::size_t oo = 0; oo < d_out; ++oo) {
            const double* w = wk + oo * d_in;
            double acc = 0.0;
            for (std::size_t c = 0; c < d_in; ++c) acc += sk[c] * w[c];
            o[oo] += acc;
          }
        }
      }
    }, 8);
  }
  const bool grad = tape.needs_grad({&hidden, &w_last, &b_last, &x, &bias});
  Tensor y({n, d_out}, std::move(out), grad);
  detail::check_finite(y, "edge_conditioned_conv");
  if (!grad) return y;

  tape.record("edge_conditioned_conv", [offsets = g.in_offsets, sources = g.sources, hidden,
                                        w_last, b_last, x, bias, y,
                                        summary = std::move(summary), n, d_in, d_out,
                                        k_dim, rows, stride, width]() mutable {
    const auto gy = y.grad();
    const auto wv = w_last.values();
    const auto bl = b_last.values();
    if (bias.requires_grad()) {
      auto db = bias.mutable_grad();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t o = 0; o < d_out; ++o) db[o] += gy[i * d_out + o];
      }
    }
    if (w_last.requires_grad() || b_last.requires_grad()) {
      auto dw = w_last.requires_grad() ? w_last.mutable_grad() : std::span<double>();
      auto dbl = b_last.requires_grad() ? b_last.mutable_grad() : std::span<double>();
      for (std::size_t i = 0; i < n; ++i) {
        const double* s = summary.data() + i * stride;
        const double* gi = gy.data() + i * d_out;
        for (std::size_t k = 0; k < rows; ++k) {
          double* dk = k < k_dim ? (dw.empty() ? nullptr : dw.data() + k * width)
                                 : (dbl.empty() ? nullptr : dbl.data());
          if (!dk) continue;
          const double* sk = s + k * d_in;
          for (std::size_t o = 0; o < d_out; ++o) {
            const double go = gi[o];
            if (go == 0.0) continue;
            double* d = dk + o * d_in;
            for (std::size_t c = 0; c < d_in; ++c) d[c] += go * sk[c];
          }
        }
      }
    }
    if (!hidden.requires_grad() && !x.requires_grad()) return;

    // dS_i = W'^T-contracted output gradient, scaled by 1/deg.
    std::vector<double> d_summary(n * stride, 0.0);
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        const double inv_deg = 1.0 / static_cast<double>((offsets[i + 1] - offsets[i]));
        const double* gi = gy.data() + i * d_out;
        double* ds = d_summary.data() + i * stride;
        for (std::size_t k = 0; k < rows; ++k) {
          const double* wk = k < k_dim ? wv.data() + k * width : bl.data();
          double* dsk = ds + k * d_in;
          for (std::size_t o = 0; o < d_out; ++o) {
            const double go = gi[o] * inv_deg;
            if (go == 0.0) continue;
            const double* w = wk + o * d_in;
            for (std::size_t c = 0; c < d_in; ++c) dsk[c] += go * w[c];
          }
        }
      }
    }, 8);

    const auto hv = hidden.values();
    const auto xv = x.values();
    if (hidden.requires_grad()) {
      auto dh = hidden.mutable_grad();
      parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          const double* ds = d_summary.data() + i * stride;
          for (auto e = offsets[i]; e < offsets[i + 1]; ++e) {
            const double* xj = xv.data() + sources[e] * d_in;
            double* dhe = dh.data() + e * k_dim;
            for (std::size_t k = 0; k < k_dim; ++k) {
              const double* dsk = ds + k * d_in;
              double acc = 0.0;
              for (std::size_t c = 0; c < d_in; ++c) acc += dsk[c] * xj[c];
              dhe[k] += acc;
            }
          }
        }
      }, 8);
    }
    if (x.requires_grad()) {
      auto dx = x.mutable_grad();
      for (std::size_t i = 0; i < n; ++i) {
        const double* ds = d_summary.data() + i * stride;
        const double* ds_bias = ds + k_dim * d_in;
        for (auto e = offsets[i]; e < offsets[i + 1]; ++e) {
          const double* he = hv.data() + e * k_dim;
          double* dxj = dx.data() + sources[e] * d_in;
          for (std::size_t c = 0; c < d_in; ++c) dxj[c] += ds_bias[c];
          for (std::size_t k = 0; k < k_dim; ++k) {
            const double hk = he[k];
            if (hk == 0.0) continue;
            const double* dsk = ds + k * d_in;
            for (std::size_t c = 0; c < d_in; ++c) dxj[c] += hk * dsk[c];
          }
        }
      }
    }
  });
  return y;
}

Tensor filtered_mean_aggregate(Tape& tape, const GeometricGraph& g, const Tensor& theta,
                               const Tensor& x, const Tensor& bias) {
  const std::size_t n = g.node_count();
  const std::size_t d_in = x.rank() == 2 ? x.dim(1) : 0;
  check_conv_inputs(g, x, d_in);
  if (theta.rank() != 2 || theta.dim(0) != g.edge_count() || theta.dim(1) % d_in != 0) {
    throw DimensionError("filter weights " + shape_to_string(theta.shape()) +
                         " do not match " + std::to_string(g.edge_count()) +
                         " edges and input width " + std::to_string(d_in));
  }
  const std::size_t d_out = theta.dim(1) / d_in;
  if (bias.defined() && bias.numel() != d_out) {
    throw DimensionError("bias " + shape_to_string(bias.shape()) + " does not match output width " +
                         std::to_string(d_out));
  }
  const std::size_t width = d_out * d_in;
  const auto tv = theta.values();
  const auto xv = x.values();
  std::vector<double> out(n * d_out, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* o = out.data() + i * d_out;
    for (auto e = g.in_offsets[i]; e < g.in_offsets[i + 1]; ++e) {
      const double* xj = xv.data() + g.sources[e] * d_in;
      const double* t = tv.data() + e * width;
      for (std::size_t oo = 0; oo < d_out; ++oo) {
        for (std::size_t c = 0; c < d_in; ++c) o[oo] += t[oo * d_in + c] * xj[c];
      }
    }
    const double inv_deg = 1.0 / static_cast<double>(g.in_degree(i));
    for (std::size_t oo = 0; oo < d_out; ++oo) {
      o[oo] *= inv_deg;
      if (bias.defined()) o[oo] += bias.values()[oo];
    }
  }
  const bool grad = tape.needs_grad({&theta, &x, &bias});
  Tensor y({n, d_out}, std::move(out), grad);
  detail::check_finite(y, "filtered_mean_aggregate");
  if (!grad) return y;
  tape.record("filtered_mean_aggregate", [offsets = g.in_offsets, sources = g.sources, theta, x,
                                          bias, y, n, d_in, d_out, width]() mutable {
    const auto gy = y.grad();
    const auto tv = theta.values();
    const auto xv = x.values();
    if (bias.defined() && bias.requires_grad()) {
      auto db = bias.mutable_grad();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t o = 0; o < d_out; ++o) db[o] += gy[i * d_out + o];
      }
    }
    auto dt = theta.requires_grad() ? theta.mutable_grad() : std::span<double>();
    auto dx = x.requires_grad() ? x.mutable_grad() : std::span<double>();
    for (std::size_t i = 0; i < n; ++i) {
      const double inv_deg = 1.0 / static_cast<double>((offsets[i + 1] - offsets[i]));
      for (auto e = offsets[i]; e < offsets[i + 1]; ++e) {
        const std::size_t j = sources[e];
        for (std::size_t o = 0; o < d_out; ++o) {
          const double go = gy[i * d_out + o] * inv_deg;
          for (std::size_t c = 0; c < d_in; ++c) {
            if (!dt.empty()) dt[e * width + o * d_in + c] += go * xv[j * d_in + c];
            if (!dx.empty()) dx[j * d_in + c] += go * tv[e * width + o * d_in + c];
          }
        }
      }
    }
  });
  return y;
}

RagcBlock RagcBlock::init(std::size_t attr_width, const std::vector<std::size_t>& filter_widths,
                          std::size_t d_in, std::size_t d_out, const RagcOptions& options,
                          std::mt19937_64& rng) {
  RagcBlock block;
  block.options = options;
  block.conv1 = AgcLayer::init(attr_width, filter_widths, d_in, d_out, rng);
  block.conv2 = AgcLayer::init(attr_width, filter_widths, d_out, d_out, rng);
  block.bn1 = BatchNorm::init(d_out);
  block.bn2 = BatchNorm::init(d_out);
  if (options.residual) block.projection = Linear::init(d_in, d_out, rng);
  return block;
}

Tensor RagcBlock::forward(Tape& tape, const GeometricGraph& g, const Tensor& x, Mode mode) {
  Tensor f = conv1.forward(tape, g, x);
  if (options.batch_norm) f = bn1.forward(tape, f, mode);
  f = relu(tape, f);
  f = conv2.forward(tape, g, f);
  if (options.batch_norm) f = bn2.forward(tape, f, mode);
  if (!options.residual) return relu(tape, f);
  const Tensor shortcut = projection.forward(tape, x);
  if (options.post_add_relu) return relu(tape, add(tape, f, shortcut));
  return add(tape, relu(tape, f), shortcut);
}

void RagcBlock::collect(ParameterSet& set, const std::string& prefix) {
  conv1.collect(set, prefix + ".conv1");
  if (options.batch_norm) bn1.collect(set, prefix + ".bn1");
  conv2.collect(set, prefix + ".conv2");
  if (options.batch_norm) bn2.collect(set, prefix + ".bn2");
  if (options.residual) projection.collect(set, prefix + ".proj");
}

}  // namespace ragc

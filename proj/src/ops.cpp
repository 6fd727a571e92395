#include "ragc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ragc/error.hpp"
#include "ragc/parallel.hpp"

namespace ragc {

namespace {

void require_rank2(const Tensor& t, const char* what) {
  if (!t.defined() || t.rank() != 2) {
    throw DimensionError(std::string(what) + " must be a matrix, got shape " +
                         shape_to_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " +
                         shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()) + " differ");
  }
}

Tensor make_output(Shape shape, std::vector<double> values, bool grad) {
  return Tensor(std::move(shape), std::move(values), grad);
}

}  // namespace

Tensor linear(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank2(x, "linear input");
  require_rank2(w, "linear weight");
  const std::size_t n = x.dim(0), din = x.dim(1), dout = w.dim(1);
  if (w.dim(0) != din) {
    throw DimensionError("linear: input " + shape_to_string(x.shape()) +
                         " does not match weight " + shape_to_string(w.shape()));
  }
  if (b.defined() && b.numel() != dout) {
    throw DimensionError("linear: bias " + shape_to_string(b.shape()) +
                         " does not match weight " + shape_to_string(w.shape()));
  }
  std::vector<double> out(n * dout, 0.0);
  {
    const auto xv = x.values();
    const auto wv = w.values();
    const auto bv = b.values();
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        double* row = out.data() + i * dout;
        if (!bv.empty()) std::copy(bv.begin(), bv.end(), row);
        for (std::size_t k = 0; k < din; ++k) {
          const double xik = xv[i * din + k];
          if (xik == 0.0) continue;
          const double* wrow = wv.data() + k * dout;
          for (std::size_t j = 0; j < dout; ++j) row[j] += xik * wrow[j];
        }
      }
    });
  }
  const bool grad = tape.needs_grad({&x, &w, &b});
  Tensor y = make_output({n, dout}, std::move(out), grad);
  detail::check_finite(y, "linear");
  if (grad) {
    tape.record("linear", [x, w, b, y, n, din, dout]() mutable {
      const auto g = y.grad();
      if (x.requires_grad()) {
        auto dx = x.mutable_grad();
        const auto wv = w.values();
        parallel_for(n, [&](std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t k = 0; k < din; ++k) {
              double acc = 0.0;
              const double* wrow = wv.data() + k * dout;
              const double* grow = g.data() + i * dout;
              for (std::size_t j = 0; j < dout; ++j) acc += grow[j] * wrow[j];
              dx[i * din + k] += acc;
            }
          }
        });
      }
      if (w.requires_grad()) {
        auto dw = w.mutable_grad();
        const auto xv = x.values();
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t k = 0; k < din; ++k) {
            const double xik = xv[i * din + k];
            if (xik == 0.0) continue;
            double* dwrow = dw.data() + k * dout;
            const double* grow = g.data() + i * dout;
            for (std::size_t j = 0; j < dout; ++j) dwrow[j] += xik * grow[j];
          }
        }
      }
      if (b.defined() && b.requires_grad()) {
        auto db = b.mutable_grad();
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < dout; ++j) db[j] += g[i * dout + j];
        }
      }
    });
  }
  return y;
}

Tensor relu(Tape& tape, const Tensor& x) {
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  const bool grad = tape.needs_grad({&x});
  Tensor y = make_output(x.shape(), std::move(out), grad);
  if (grad) {
    tape.record("relu", [x, y]() mutable {
      const auto g = y.grad();
      const auto xv = x.values();
      auto dx = x.mutable_grad();
      for (std::size_t i = 0; i < xv.size(); ++i) {
        if (xv[i] > 0.0) dx[i] += g[i];
      }
    });
  }
  return y;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  const bool grad = tape.needs_grad({&a, &b});
  Tensor y = make_output(a.shape(), std::move(out), grad);
  detail::check_finite(y, "add");
  if (grad) {
    tape.record("add", [a, b, y]() mutable {
      const auto g = y.grad();
      if (a.requires_grad()) {
        auto da = a.mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
      }
      if (b.requires_grad()) {
        auto db = b.mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i];
      }
    });
  }
  return y;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  const bool grad = tape.needs_grad({&a, &b});
  Tensor y = make_output(a.shape(), std::move(out), grad);
  detail::check_finite(y, "mul");
  if (grad) {
    tape.record("mul", [a, b, y]() mutable {
      const auto g = y.grad();
      const auto av = a.values();
      const auto bv = b.values();
      // a and b may alias; read values before touching either gradient.
      if (a.requires_grad()) {
        auto da = a.mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * bv[i];
      }
      if (b.requires_grad()) {
        auto db = b.mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * av[i];
      }
    });
  }
  return y;
}

Tensor sum(Tape& tape, const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  const bool grad = tape.needs_grad({&x});
  Tensor y = make_output({1}, {total}, grad);
  if (grad) {
    tape.record("sum", [x, y]() mutable {
      const double g = y.grad()[0];
      for (double& d : x.mutable_grad()) d += g;
    });
  }
  return y;
}

Tensor batch_norm(Tape& tape, const Tensor& x, const Tensor& gamma,
                  const Tensor& beta, BatchNormState& state, Mode mode) {
  require_rank2(x, "batch_norm input");
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (gamma.numel() != d || beta.numel() != d || state.running_mean.size() != d ||
      state.running_var.size() != d) {
    throw DimensionError("batch_norm: parameters sized for " +
                         std::to_string(gamma.numel()) + " features, input " +
                         shape_to_string(x.shape()));
  }
  const auto xv = x.values();
  const auto gv = gamma.values();
  const auto bv = beta.values();
  std::vector<double> mean(d, 0.0), inv_std(d, 0.0);

  if (mode == Mode::kTrain) {
    if (n < 2) {
      throw BatchTooSmallError("batch_norm in training mode needs at least 2 rows, got " +
                               std::to_string(n));
    }
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) mean[j] += xv[i * d + j];
    }
    for (auto& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const double c = xv[i * d + j] - mean[j];
        var[j] += c * c;
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      var[j] /= static_cast<double>(n);
      inv_std[j] = 1.0 / std::sqrt(var[j] + state.eps);
      state.running_mean[j] =
          (1.0 - state.momentum) * state.running_mean[j] + state.momentum * mean[j];
      state.running_var[j] =
          (1.0 - state.momentum) * state.running_var[j] + state.momentum * var[j];
    }
  } else {
    for (std::size_t j = 0; j < d; ++j) {
      mean[j] = state.running_mean[j];
      inv_std[j] = 1.0 / std::sqrt(state.running_var[j] + state.eps);
    }
  }

  std::vector<double> xhat(n * d), out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (xv[i * d + j] - mean[j]) * inv_std[j];
      xhat[i * d + j] = h;
      out[i * d + j] = gv[j] * h + bv[j];
    }
  }
  const bool grad = tape.needs_grad({&x, &gamma, &beta});
  Tensor y = make_output({n, d}, std::move(out), grad);
  detail::check_finite(y, "batch_norm");
  if (grad) {
    tape.record("batch_norm", [x, gamma, beta, y, xhat = std::move(xhat),
                               inv_std = std::move(inv_std), n, d,
                               train = mode == Mode::kTrain]() mutable {
      const auto g = y.grad();
      const auto gv = gamma.values();
      if (gamma.requires_grad() || beta.requires_grad()) {
        std::vector<double> dgamma(d, 0.0), dbeta(d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < d; ++j) {
            dgamma[j] += g[i * d + j] * xhat[i * d + j];
            dbeta[j] += g[i * d + j];
          }
        }
        if (gamma.requires_grad()) {
          auto dg = gamma.mutable_grad();
          for (std::size_t j = 0; j < d; ++j) dg[j] += dgamma[j];
        }
        if (beta.requires_grad()) {
          auto db = beta.mutable_grad();
          for (std::size_t j = 0; j < d; ++j) db[j] += dbeta[j];
        }
      }
      if (!x.requires_grad()) return;
      auto dx = x.mutable_grad();
      if (!train) {
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < d; ++j) {
            dx[i * d + j] += g[i * d + j] * gv[j] * inv_std[j];
          }
        }
        return;
      }
      std::vector<double> sum_dh(d, 0.0), sum_dh_h(d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          const double dh = g[i * d + j] * gv[j];
          sum_dh[j] += dh;
          sum_dh_h[j] += dh * xhat[i * d + j];
        }
      }
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          const double dh = g[i * d + j] * gv[j];
          dx[i * d + j] += inv_std[j] * inv_n *
                           (static_cast<double>(n) * dh - sum_dh[j] -
                            xhat[i * d + j] * sum_dh_h[j]);
        }
      }
    });
  }
  return y;
}

Tensor dropout(Tape& tape, const Tensor& x, double p, Mode mode,
               std::mt19937_64& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("dropout probability must lie in [0, 1), got " +
                      std::to_string(p));
  }
  if (mode == Mode::kEval || p == 0.0) return x;
  const auto xv = x.values();
  const double scale = 1.0 / (1.0 - p);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> mask(xv.size());
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    mask[i] = unit(rng) < p ? 0.0 : scale;
    out[i] = xv[i] * mask[i];
  }
  const bool grad = tape.needs_grad({&x});
  Tensor y = make_output(x.shape(), std::move(out), grad);
  if (grad) {
    tape.record("dropout", [x, y, mask = std::move(mask)]() mutable {
      const auto g = y.grad();
      auto dx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * mask[i];
    });
  }
  return y;
}

Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits,
                             std::span<const int> targets) {
  require_rank2(logits, "softmax_cross_entropy logits");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  if (targets.size() != n) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(targets.size()) +
                         " targets for logits " + shape_to_string(logits.shape()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= c) {
      throw LabelError("target " + std::to_string(targets[i]) + " at row " +
                       std::to_string(i) + " outside [0, " + std::to_string(c) + ")");
    }
  }
  const auto lv = logits.values();
  std::vector<double> probs(n * c);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = lv.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - mx);
    const double log_z = std::log(z);
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] = std::exp(row[j] - mx - log_z);
    loss -= row[targets[i]] - mx - log_z;
  }
  loss /= static_cast<double>(n);
  const bool grad = tape.needs_grad({&logits});
  Tensor y = make_output({1}, {loss}, grad);
  detail::check_finite(y, "softmax_cross_entropy");
  if (grad) {
    std::vector<int> t(targets.begin(), targets.end());
    tape.record("softmax_cross_entropy",
                [logits, y, probs = std::move(probs), t = std::move(t), n, c]() mutable {
                  const double g = y.grad()[0] / static_cast<double>(n);
                  auto dl = logits.mutable_grad();
                  for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < c; ++j) {
                      const double onehot = static_cast<int>(j) == t[i] ? 1.0 : 0.0;
                      dl[i * c + j] += g * (probs[i * c + j] - onehot);
                    }
                  }
                });
  }
  return y;
}

Tensor softmax(const Tensor& logits) {
  require_rank2(logits, "softmax logits");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  const auto lv = logits.values();
  std::vector<double> out(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = lv.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out[i * c + j] = std::exp(row[j] - mx);
      z += out[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= z;
  }
  return Tensor({n, c}, std::move(out));
}

Tensor segment_mean(Tape& tape, const Tensor& x,
                    std::span<const std::size_t> segment_of_row,
                    std::size_t segments) {
  require_rank2(x, "segment_mean input");
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (segment_of_row.size() != n) {
    throw DimensionError("segment_mean: " + std::to_string(segment_of_row.size()) +
                         " segment ids for " + std::to_string(n) + " rows");
  }
  std::vector<double> counts(segments, 0.0);
  for (auto s : segment_of_row) {
    if (s >= segments) {
      throw DataError("segment id " + std::to_string(s) + " outside [0, " +
                      std::to_string(segments) + ")");
    }
    counts[s] += 1.0;
  }
  for (std::size_t s = 0; s < segments; ++s) {
    if (counts[s] == 0.0) {
      throw DataError("segment " + std::to_string(s) + " has no rows");
    }
  }
  const auto xv = x.values();
  std::vector<double> out(segments * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = segment_of_row[i];
    for (std::size_t j = 0; j < d; ++j) out[s * d + j] += xv[i * d + j];
  }
  for (std::size_t s = 0; s < segments; ++s) {
    for (std::size_t j = 0; j < d; ++j) out[s * d + j] /= counts[s];
  }
  const bool grad = tape.needs_grad({&x});
  Tensor y = make_output({segments, d}, std::move(out), grad);
  if (grad) {
    std::vector<std::size_t> seg(segment_of_row.begin(), segment_of_row.end());
    tape.record("segment_mean", [x, y, seg = std::move(seg),
                                 counts = std::move(counts), n, d]() mutable {
      const auto g = y.grad();
      auto dx = x.mutable_grad();
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t s = seg[i];
        for (std::size_t j = 0; j < d; ++j) dx[i * d + j] += g[s * d + j] / counts[s];
      }
    });
  }
  return y;
}

Tensor segment_max(Tape& tape, const Tensor& x,
                   std::span<const std::size_t> segment_of_row,
                   std::size_t segments) {
  require_rank2(x, "segment_max input");
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (segment_of_row.size() != n) {
    throw DimensionError("segment_max: " + std::to_string(segment_of_row.size()) +
                         " segment ids for " + std::to_string(n) + " rows");
  }
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> argmax(segments * d, kNone);
  std::vector<double> out(segments * d, 0.0);
  const auto xv = x.values();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = segment_of_row[i];
    if (s >= segments) {
      throw DataError("segment id " + std::to_string(s) + " outside [0, " +
                      std::to_string(segments) + ")");
    }
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t o = s * d + j;
      // Strict comparison keeps the first (lowest-index) row on ties.
      if (argmax[o] == kNone || xv[i * d + j] > out[o]) {
        argmax[o] = i;
        out[o] = xv[i * d + j];
      }
    }
  }
  for (std::size_t s = 0; s < segments; ++s) {
    if (d > 0 && argmax[s * d] == kNone) {
      throw DataError("segment " + std::to_string(s) + " has no rows");
    }
  }
  const bool grad = tape.needs_grad({&x});
  Tensor y = make_output({segments, d}, std::move(out), grad);
  if (grad) {
    tape.record("segment_max", [x, y, argmax = std::move(argmax), d]() mutable {
      const auto g = y.grad();
      auto dx = x.mutable_grad();
      for (std::size_t o = 0; o < argmax.size(); ++o) {
        dx[argmax[o] * d + o % d] += g[o];
      }
    });
  }
  return y;
}

}  // namespace ragc

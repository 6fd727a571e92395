#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ragc/tensor.hpp"

namespace ragc {

struct GradCheckReport {
  /// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1e-8) over
  /// entries whose analytic gradient is at least `small_gradient` in size.
  double max_rel_error = 0.0;
  /// Largest |analytic - numeric| over the remaining (near-zero) entries.
  double max_abs_error = 0.0;
  std::size_t checked = 0;
  /// Entries re-estimated with a smaller step after a mismatch at h.
  std::size_t refined = 0;

  bool ok(double rel_tol, double abs_tol = 1e-7) const {
    return max_rel_error < rel_tol && max_abs_error < abs_tol;
  }
};

/// Scalar-valued function of the tape; it reads its inputs by capture.
using ScalarFunction = std::function<Tensor(Tape&)>;

/// Compares the tape gradient of f with central differences
/// (f(x+h e_i) - f(x-h e_i)) / 2h for every element of every input. An entry
/// that disagrees at h is re-estimated at h/10 and h/100 and keeps the best.
GradCheckReport gradient_check(const ScalarFunction& f,
                               std::vector<Tensor> inputs, double h = 1e-5,
                               double small_gradient = 1e-6);

/// Single-input form: f receives the tensor being checked.
GradCheckReport gradient_check(const std::function<Tensor(Tape&, const Tensor&)>& f,
                               Tensor x, double h = 1e-5,
                               double small_gradient = 1e-6);

}  // namespace ragc

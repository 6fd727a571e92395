#include "ragc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ragc/error.hpp"

namespace ragc {

namespace {
#ifdef NDEBUG
bool g_debug_checks = false;
#else
bool g_debug_checks = true;
#endif
}  // namespace

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : storage_(std::make_shared<Storage>()) {
  for (auto extent : shape) {
    if (extent == 0) {
      throw DimensionError("tensor extents must be positive, got " +
                           shape_to_string(shape));
    }
  }
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("shape " + shape_to_string(shape) + " needs " +
                         std::to_string(shape_numel(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  storage_->shape = std::move(shape);
  storage_->values = std::move(values);
  storage_->requires_grad = requires_grad;
  if (requires_grad) storage_->grad.assign(storage_->values.size(), 0.0);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return filled(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  static const Shape kEmpty;
  return storage_ ? storage_->shape : kEmpty;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for shape " +
                         shape_to_string(shape()));
  }
  return shape()[axis];
}

std::size_t Tensor::numel() const {
  return storage_ ? storage_->values.size() : 0;
}

std::span<const double> Tensor::values() const {
  if (!storage_) return {};
  return storage_->values;
}

std::span<double> Tensor::mutable_values() const {
  if (!storage_) return {};
  return storage_->values;
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ContractError("item() on non-scalar tensor of shape " +
                        shape_to_string(shape()));
  }
  return storage_->values[0];
}

bool Tensor::requires_grad() const {
  return storage_ && storage_->requires_grad;
}

std::span<const double> Tensor::grad() const {
  if (!storage_) return {};
  if (storage_->grad.size() != storage_->values.size()) {
    storage_->grad.assign(storage_->values.size(), 0.0);
  }
  return storage_->grad;
}

std::span<double> Tensor::mutable_grad() const {
  if (!storage_) return {};
  if (storage_->grad.size() != storage_->values.size()) {
    storage_->grad.assign(storage_->values.size(), 0.0);
  }
  return storage_->grad;
}

void Tensor::zero_grad() {
  if (!storage_) return;
  storage_->grad.assign(storage_->values.size(), 0.0);
}

Tensor Tensor::clone(bool requires_grad) const {
  return Tensor(shape(), std::vector<double>(values().begin(), values().end()),
                requires_grad);
}

bool Tape::needs_grad(std::initializer_list<const Tensor*> inputs) const {
  if (!recording_) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) {
    return t && t->defined() && t->requires_grad();
  });
}

void Tape::record(std::string name, std::function<void()> backward) {
  if (consumed_) {
    throw StaleTapeError("cannot record '" + name +
                         "' on a consumed tape; call reset() first");
  }
  entries_.push_back({std::move(name), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) {
    throw StaleTapeError("backward() called twice on the same tape without reset()");
  }
  if (!loss.defined() || loss.numel() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        shape_to_string(loss.shape()));
  }
  consumed_ = true;
  if (!loss.requires_grad()) return;
  Tensor seed = loss;
  seed.mutable_grad()[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    it->backward();
  }
}

void Tape::reset() {
  entries_.clear();
  consumed_ = false;
}

void set_debug_checks(bool enabled) { g_debug_checks = enabled; }
bool debug_checks() { return g_debug_checks; }

namespace detail {
void check_finite(const Tensor& t, const char* op) {
  if (!g_debug_checks) return;
  const auto v = t.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericalError(std::string("non-finite value produced by ") + op +
                           " at flat index " + std::to_string(i));
    }
  }
}
}  // namespace detail

}  // namespace ragc

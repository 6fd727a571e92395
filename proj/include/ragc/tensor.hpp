#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ragc {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Row-major dense array of doubles with an attached gradient slot.
///
/// Tensor is a cheap handle: copies share storage. Parameters are updated in
/// place through mutable_values(); every other tensor is written once by the
/// operation that produces it.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(storage_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> values() const;
  std::span<double> mutable_values() const;
  double operator[](std::size_t i) const { return values()[i]; }
  double item() const;

  bool requires_grad() const;
  /// Zero-filled when the tensor does not require a gradient.
  std::span<const double> grad() const;
  std::span<double> mutable_grad() const;
  void zero_grad();

  /// Deep copy without gradient history.
  Tensor clone(bool requires_grad = false) const;

  bool same_storage(const Tensor& other) const {
    return storage_ == other.storage_;
  }

 private:
  struct Storage {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> storage_;
};

/// Records differentiable operations in execution order and replays their
/// backward rules in reverse.
///
/// A non-recording tape turns every op into a plain forward computation; its
/// outputs never require a gradient.
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  std::size_t size() const { return entries_.size(); }

  /// True when an op with these inputs must be recorded.
  bool needs_grad(std::initializer_list<const Tensor*> inputs) const;

  void record(std::string name, std::function<void()> backward);

  /// Seeds d(loss)/d(loss) = 1 and runs every recorded backward rule once,
  /// newest first. Gradients accumulate into existing grad buffers.
  void backward(const Tensor& loss);

  /// Drops every recorded op so the tape can be reused.
  void reset();

 private:
  struct Entry {
    std::string name;
    std::function<void()> backward;
  };
  std::vector<Entry> entries_;
  bool recording_;
  bool consumed_ = false;
};

/// Convenience wrapper matching the free-function style of the op set.
inline void backward_pass(const Tensor& loss, Tape& tape) {
  tape.backward(loss);
}

/// When enabled, every op output is checked for NaN/inf. On by default in
/// builds without NDEBUG.
void set_debug_checks(bool enabled);
bool debug_checks();

namespace detail {
void check_finite(const Tensor& t, const char* op);
}

}  // namespace ragc

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace stflow {

using Shape = std::vector<int>;

std::int64_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);

class Tensor;

struct TensorNode {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until needed
  bool requires_grad = false;
  std::vector<Tensor> parents;
  std::function<void(TensorNode&)> backward;

  void ensure_grad();
};

/// Dense n-d array of doubles, row-major. Value semantics over a shared node
/// so graph edges stay alive while a Tape holds them.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorNode> n) : node_(std::move(n)) {}

  static Tensor zeros(const Shape& s);
  static Tensor full(const Shape& s, double v);
  static Tensor from_data(const Shape& s, std::vector<double> d);
  static Tensor scalar(double v);
  // Leaf with requires_grad set; the usual constructor for parameters.
  static Tensor param(const Shape& s, std::vector<double> d);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::int64_t size() const { return static_cast<std::int64_t>(node_->data.size()); }
  int dim(int i) const { return node_->shape[static_cast<size_t>(i)]; }

  std::vector<double>& data() { return node_->data; }
  const std::vector<double>& data() const { return node_->data; }
  std::vector<double>& grad();
  bool has_grad() const { return !node_->grad.empty(); }
  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool b) { node_->requires_grad = b; }
  void zero_grad();

  double item() const;
  double at4(int b, int c, int y, int x) const;

  TensorNode* node() const { return node_.get(); }

 private:
  std::shared_ptr<TensorNode> node_;
};

/// Records primitive ops in execution order; backward replays in exact
/// reverse. One tape may be active per thread at a time (nesting allowed,
/// inner shadows outer).
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // loss must be a scalar recorded on this tape.
  void backward(const Tensor& loss);
  size_t recorded() const { return nodes_.size(); }

  static Tape* active();
  void record(const Tensor& t) { nodes_.push_back(t); }

 private:
  std::vector<Tensor> nodes_;
  Tape* prev_ = nullptr;
};

/// While active, straight-through / surrogate ops (qcfs, spike) evaluate
/// their smooth relaxation in the forward pass, so central differences agree
/// with the analytic backward rules. Smooth ops are unaffected.
class RelaxedModeGuard {
 public:
  RelaxedModeGuard();
  ~RelaxedModeGuard();
  static bool active();

 private:
  bool prev_;
};

// ---- primitive ops ----

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // Hadamard
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);
Tensor sigmoid(const Tensor& x);
Tensor tanh_(const Tensor& x);
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor sum(const Tensor& x);  // -> scalar

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int padding);
Tensor bilinear_upsample(const Tensor& input, int factor);

// h(x) = lambda * clip(floor(x*L/lambda)/L, 0, 1); straight-through backward.
// shifted adds the half-step inside the floor.
Tensor qcfs(const Tensor& x, const Tensor& lambda, int levels, bool shifted = false);

// Heaviside on v - theta (pass the difference); arctan surrogate backward.
Tensor spike(const Tensor& v_minus_theta);

Tensor replicate_channels(const Tensor& x, int times);

// Escape hatch for composite primitives defined in other modules (losses).
Tensor make_op(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
               std::function<void(TensorNode&)> backward);

/// Compares analytic gradients of sum(fn(inputs)) against central finite
/// differences, in relaxed mode. Returns max over checked elements of
/// |analytic - numeric| / max(1, |numeric|). When samples_per_input > 0 only
/// that many elements per input are probed (deterministic choice).
double grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& fn,
                  std::vector<Tensor> inputs, double epsilon,
                  int samples_per_input = 0);

}  // namespace stflow

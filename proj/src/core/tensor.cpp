#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace stflow {

namespace {

thread_local Tape* g_tape = nullptr;
thread_local bool g_relaxed = false;

bool any_requires_grad(const std::vector<Tensor>& ts) {
  for (const auto& t : ts) {
    if (t.requires_grad()) return true;
  }
  return false;
}

// Builds the result node; attaches graph edges only when a tape is active and
// some parent carries gradient.
Tensor finish_op(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
                 std::function<void(TensorNode&)> backward) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  Tensor out(node);
  if (Tape* tape = Tape::active(); tape != nullptr && any_requires_grad(parents)) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward = std::move(backward);
    tape->record(out);
  }
  return out;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

}  // namespace

std::int64_t shape_size(const Shape& s) {
  std::int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

void TensorNode::ensure_grad() {
  if (grad.empty()) grad.assign(data.size(), 0.0);
}

Tensor Tensor::zeros(const Shape& s) {
  auto node = std::make_shared<TensorNode>();
  node->shape = s;
  node->data.assign(static_cast<size_t>(shape_size(s)), 0.0);
  return Tensor(node);
}

Tensor Tensor::full(const Shape& s, double v) {
  Tensor t = zeros(s);
  std::fill(t.data().begin(), t.data().end(), v);
  return t;
}

Tensor Tensor::from_data(const Shape& s, std::vector<double> d) {
  if (static_cast<std::int64_t>(d.size()) != shape_size(s)) {
    throw std::invalid_argument("from_data: " + std::to_string(d.size()) +
                                " values for shape " + shape_str(s));
  }
  auto node = std::make_shared<TensorNode>();
  node->shape = s;
  node->data = std::move(d);
  return Tensor(node);
}

Tensor Tensor::scalar(double v) { return from_data({1}, {v}); }

Tensor Tensor::param(const Shape& s, std::vector<double> d) {
  Tensor t = from_data(s, std::move(d));
  t.set_requires_grad(true);
  return t;
}

std::vector<double>& Tensor::grad() {
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() {
  node_->ensure_grad();
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

double Tensor::item() const {
  if (node_->data.size() != 1) {
    throw std::invalid_argument("item: tensor of shape " + shape_str(node_->shape) +
                                " is not scalar");
  }
  return node_->data[0];
}

double Tensor::at4(int b, int c, int y, int x) const {
  const Shape& s = node_->shape;
  return node_->data[static_cast<size_t>(((b * s[1] + c) * s[2] + y) * s[3] + x)];
}

Tape::Tape() {
  prev_ = g_tape;
  g_tape = this;
}

Tape::~Tape() { g_tape = prev_; }

Tape* Tape::active() { return g_tape; }

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                shape_str(loss.shape()));
  }
  loss.node()->ensure_grad();
  loss.node()->grad[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    TensorNode* n = it->node();
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

RelaxedModeGuard::RelaxedModeGuard() : prev_(g_relaxed) { g_relaxed = true; }
RelaxedModeGuard::~RelaxedModeGuard() { g_relaxed = prev_; }
bool RelaxedModeGuard::active() { return g_relaxed; }

Tensor make_op(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
               std::function<void(TensorNode&)> backward) {
  return finish_op(std::move(shape), std::move(data), std::move(parents),
                   std::move(backward));
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  std::vector<double> out(a.data());
  const auto& bd = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] += bd[i];
  return finish_op(a.shape(), std::move(out), {a, b}, [](TensorNode& n) {
    for (int p = 0; p < 2; ++p) {
      if (!n.parents[static_cast<size_t>(p)].requires_grad()) continue;
      auto& g = n.parents[static_cast<size_t>(p)].grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  std::vector<double> out(a.data());
  const auto& bd = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] -= bd[i];
  return finish_op(a.shape(), std::move(out), {a, b}, [](TensorNode& n) {
    if (n.parents[0].requires_grad()) {
      auto& g = n.parents[0].grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (n.parents[1].requires_grad()) {
      auto& g = n.parents[1].grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  std::vector<double> out(a.data());
  const auto& bd = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= bd[i];
  return finish_op(a.shape(), std::move(out), {a, b}, [](TensorNode& n) {
    const auto& ad = n.parents[0].data();
    const auto& bd2 = n.parents[1].data();
    if (n.parents[0].requires_grad()) {
      auto& g = n.parents[0].grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * bd2[i];
    }
    if (n.parents[1].requires_grad()) {
      auto& g = n.parents[1].grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * ad[i];
    }
  });
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.data());
  for (double& v : out) v *= c;
  return finish_op(a.shape(), std::move(out), {a}, [c](TensorNode& n) {
    if (!n.parents[0].requires_grad()) return;
    auto& g = n.parents[0].grad();
    for (size_t i = 0; i < g.size(); ++i) g[i] += c * n.grad[i];
  });
}

Tensor add_scalar(const Tensor& a, double c) {
  std::vector<double> out(a.data());
  for (double& v : out) v += c;
  return finish_op(a.shape(), std::move(out), {a}, [](TensorNode& n) {
    if (!n.parents[0].requires_grad()) return;
    auto& g = n.parents[0].grad();
    for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  });
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.data());
  for (double& v : out) v = 1.0 / (1.0 + std::exp(-v));
  Tensor result = finish_op(x.shape(), std::move(out), {x}, nullptr);
  if (result.node()->requires_grad) {
    result.node()->backward = [y = result.data()](TensorNode& n) {
      if (!n.parents[0].requires_grad()) return;
      auto& g = n.parents[0].grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * y[i] * (1.0 - y[i]);
    };
  }
  return result;
}

Tensor tanh_(const Tensor& x) {
  std::vector<double> out(x.data());
  for (double& v : out) v = std::tanh(v);
  Tensor result = finish_op(x.shape(), std::move(out), {x}, nullptr);
  if (result.node()->requires_grad) {
    result.node()->backward = [y = result.data()](TensorNode& n) {
      if (!n.parents[0].requires_grad()) return;
      auto& g = n.parents[0].grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * (1.0 - y[i] * y[i]);
    };
  }
  return result;
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  const Shape& ref = parts[0].shape();
  const int nd = static_cast<int>(ref.size());
  if (axis < 0 || axis >= nd) throw std::invalid_argument("concat: bad axis");
  Shape out_shape = ref;
  out_shape[static_cast<size_t>(axis)] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (static_cast<int>(s.size()) != nd) {
      throw std::invalid_argument("concat: rank mismatch");
    }
    for (int d = 0; d < nd; ++d) {
      if (d != axis && s[static_cast<size_t>(d)] != ref[static_cast<size_t>(d)]) {
        throw std::invalid_argument("concat: off-axis shape mismatch " +
                                    shape_str(ref) + " vs " + shape_str(s));
      }
    }
    out_shape[static_cast<size_t>(axis)] += s[static_cast<size_t>(axis)];
  }

  // outer = product of dims before axis, inner = product after.
  std::int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= ref[static_cast<size_t>(d)];
  for (int d = axis + 1; d < nd; ++d) inner *= ref[static_cast<size_t>(d)];

  std::vector<double> out(static_cast<size_t>(shape_size(out_shape)));
  const std::int64_t out_axis = out_shape[static_cast<size_t>(axis)];
  std::int64_t offset = 0;
  for (const auto& p : parts) {
    const std::int64_t ax = p.shape()[static_cast<size_t>(axis)];
    const auto& pd = p.data();
    for (std::int64_t o = 0; o < outer; ++o) {
      const double* src = pd.data() + o * ax * inner;
      double* dst = out.data() + (o * out_axis + offset) * inner;
      std::copy(src, src + ax * inner, dst);
    }
    offset += ax;
  }

  return finish_op(out_shape, std::move(out), parts,
                   [axis, outer, inner, out_axis](TensorNode& n) {
                     std::int64_t off = 0;
                     for (auto& p : n.parents) {
                       const std::int64_t ax = p.shape()[static_cast<size_t>(axis)];
                       if (p.requires_grad()) {
                         auto& g = p.grad();
                         for (std::int64_t o = 0; o < outer; ++o) {
                           const double* src = n.grad.data() + (o * out_axis + off) * inner;
                           double* dst = g.data() + o * ax * inner;
                           for (std::int64_t i = 0; i < ax * inner; ++i) dst[i] += src[i];
                         }
                       }
                       off += ax;
                     }
                   });
}

Tensor sum(const Tensor& x) {
  double s = std::accumulate(x.data().begin(), x.data().end(), 0.0);
  return finish_op({1}, {s}, {x}, [](TensorNode& n) {
    if (!n.parents[0].requires_grad()) return;
    auto& g = n.parents[0].grad();
    for (double& v : g) v += n.grad[0];
  });
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int padding) {
  const Shape& is = input.shape();
  const Shape& ws = weight.shape();
  if (is.size() != 4 || ws.size() != 4) {
    throw std::invalid_argument("conv2d: expected 4-d input/weight, got " +
                                shape_str(is) + " and " + shape_str(ws));
  }
  const int B = is[0], Cin = is[1], H = is[2], W = is[3];
  const int Cout = ws[0], kH = ws[2], kW = ws[3];
  if (ws[1] != Cin) {
    throw std::invalid_argument("conv2d: input channels " + shape_str(is) +
                                " do not match weight " + shape_str(ws));
  }
  if (kH % 2 == 0 || kW % 2 == 0) throw std::invalid_argument("conv2d: kernel must be odd");
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be positive");
  if (padding < 0) throw std::invalid_argument("conv2d: negative padding");
  if (H + 2 * padding < kH || W + 2 * padding < kW) {
    throw std::invalid_argument("conv2d: kernel larger than padded input");
  }
  if (bias.shape() != Shape{Cout}) {
    throw std::invalid_argument("conv2d: bias shape " + shape_str(bias.shape()) +
                                " does not match Cout " + std::to_string(Cout));
  }
  const int Ho = (H + 2 * padding - kH) / stride + 1;
  const int Wo = (W + 2 * padding - kW) / stride + 1;

  std::vector<double> out(static_cast<size_t>(B) * Cout * Ho * Wo);
  const auto& in = input.data();
  const auto& w = weight.data();
  const auto& bsv = bias.data();
  for (int b = 0; b < B; ++b) {
    for (int co = 0; co < Cout; ++co) {
      for (int oy = 0; oy < Ho; ++oy) {
        for (int ox = 0; ox < Wo; ++ox) {
          double acc = bsv[static_cast<size_t>(co)];
          for (int ci = 0; ci < Cin; ++ci) {
            const double* in_c = in.data() + (static_cast<size_t>(b) * Cin + ci) * H * W;
            const double* w_c =
                w.data() + ((static_cast<size_t>(co) * Cin + ci) * kH) * kW;
            for (int ky = 0; ky < kH; ++ky) {
              const int iy = oy * stride - padding + ky;
              if (iy < 0 || iy >= H) continue;
              for (int kx = 0; kx < kW; ++kx) {
                const int ix = ox * stride - padding + kx;
                if (ix < 0 || ix >= W) continue;
                acc += in_c[iy * W + ix] * w_c[ky * kW + kx];
              }
            }
          }
          out[((static_cast<size_t>(b) * Cout + co) * Ho + oy) * Wo + ox] = acc;
        }
      }
    }
  }

  return finish_op(
      {B, Cout, Ho, Wo}, std::move(out), {input, weight, bias},
      [stride, padding](TensorNode& n) {
        const Shape& is2 = n.parents[0].shape();
        const Shape& ws2 = n.parents[1].shape();
        const int B2 = is2[0], Cin2 = is2[1], H2 = is2[2], W2 = is2[3];
        const int Cout2 = ws2[0], kH2 = ws2[2], kW2 = ws2[3];
        const int Ho2 = n.shape[2], Wo2 = n.shape[3];
        const auto& in2 = n.parents[0].data();
        const auto& w2 = n.parents[1].data();
        const bool need_in = n.parents[0].requires_grad();
        const bool need_w = n.parents[1].requires_grad();
        const bool need_b = n.parents[2].requires_grad();
        std::vector<double>* gin = need_in ? &n.parents[0].grad() : nullptr;
        std::vector<double>* gw = need_w ? &n.parents[1].grad() : nullptr;
        std::vector<double>* gb = need_b ? &n.parents[2].grad() : nullptr;
        for (int b = 0; b < B2; ++b) {
          for (int co = 0; co < Cout2; ++co) {
            for (int oy = 0; oy < Ho2; ++oy) {
              for (int ox = 0; ox < Wo2; ++ox) {
                const double g =
                    n.grad[((static_cast<size_t>(b) * Cout2 + co) * Ho2 + oy) * Wo2 + ox];
                if (g == 0.0) continue;
                if (gb) (*gb)[static_cast<size_t>(co)] += g;
                if (!need_in && !need_w) continue;
                for (int ci = 0; ci < Cin2; ++ci) {
                  const size_t in_off = (static_cast<size_t>(b) * Cin2 + ci) * H2 * W2;
                  const size_t w_off = (static_cast<size_t>(co) * Cin2 + ci) *
                                       static_cast<size_t>(kH2) * kW2;
                  for (int ky = 0; ky < kH2; ++ky) {
                    const int iy = oy * stride - padding + ky;
                    if (iy < 0 || iy >= H2) continue;
                    for (int kx = 0; kx < kW2; ++kx) {
                      const int ix = ox * stride - padding + kx;
                      if (ix < 0 || ix >= W2) continue;
                      if (gin) (*gin)[in_off + iy * W2 + ix] += g * w2[w_off + ky * kW2 + kx];
                      if (gw) (*gw)[w_off + ky * kW2 + kx] += g * in2[in_off + iy * W2 + ix];
                    }
                  }
                }
              }
            }
          }
        }
      });
}

Tensor bilinear_upsample(const Tensor& input, int factor) {
  const Shape& is = input.shape();
  if (is.size() != 4) throw std::invalid_argument("bilinear_upsample: expected 4-d input");
  if (factor < 1) throw std::invalid_argument("bilinear_upsample: factor must be >= 1");
  const int B = is[0], C = is[1], H = is[2], W = is[3];
  const int Ho = H * factor, Wo = W * factor;

  // Precompute source corners and weights per output row/col
  // (align-corners-false: src = (i + 0.5)/f - 0.5, clamped).
  auto axis_map = [factor](int out_n, int in_n) {
    struct Lerp {
      int i0, i1;
      double w1;
    };
    std::vector<Lerp> m(static_cast<size_t>(out_n));
    for (int i = 0; i < out_n; ++i) {
      double src = (i + 0.5) / factor - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in_n - 1));
      int i0 = static_cast<int>(std::floor(src));
      int i1 = std::min(i0 + 1, in_n - 1);
      m[static_cast<size_t>(i)] = {i0, i1, src - i0};
    }
    return m;
  };
  auto ymap = axis_map(Ho, H);
  auto xmap = axis_map(Wo, W);

  std::vector<double> out(static_cast<size_t>(B) * C * Ho * Wo);
  const auto& in = input.data();
  for (int bc = 0; bc < B * C; ++bc) {
    const double* src = in.data() + static_cast<size_t>(bc) * H * W;
    double* dst = out.data() + static_cast<size_t>(bc) * Ho * Wo;
    for (int oy = 0; oy < Ho; ++oy) {
      const auto& my = ymap[static_cast<size_t>(oy)];
      for (int ox = 0; ox < Wo; ++ox) {
        const auto& mx = xmap[static_cast<size_t>(ox)];
        dst[oy * Wo + ox] = (1 - my.w1) * (1 - mx.w1) * src[my.i0 * W + mx.i0] +
                            (1 - my.w1) * mx.w1 * src[my.i0 * W + mx.i1] +
                            my.w1 * (1 - mx.w1) * src[my.i1 * W + mx.i0] +
                            my.w1 * mx.w1 * src[my.i1 * W + mx.i1];
      }
    }
  }

  return finish_op({B, C, Ho, Wo}, std::move(out), {input},
                   [ymap, xmap, B, C, H, W, Ho, Wo](TensorNode& n) {
                     if (!n.parents[0].requires_grad()) return;
                     auto& g = n.parents[0].grad();
                     for (int bc = 0; bc < B * C; ++bc) {
                       double* gsrc = g.data() + static_cast<size_t>(bc) * H * W;
                       const double* gdst = n.grad.data() + static_cast<size_t>(bc) * Ho * Wo;
                       for (int oy = 0; oy < Ho; ++oy) {
                         const auto& my = ymap[static_cast<size_t>(oy)];
                         for (int ox = 0; ox < Wo; ++ox) {
                           const auto& mx = xmap[static_cast<size_t>(ox)];
                           const double go = gdst[oy * Wo + ox];
                           if (go == 0.0) continue;
                           gsrc[my.i0 * W + mx.i0] += (1 - my.w1) * (1 - mx.w1) * go;
                           gsrc[my.i0 * W + mx.i1] += (1 - my.w1) * mx.w1 * go;
                           gsrc[my.i1 * W + mx.i0] += my.w1 * (1 - mx.w1) * go;
                           gsrc[my.i1 * W + mx.i1] += my.w1 * mx.w1 * go;
                         }
                       }
                     }
                   });
}

Tensor qcfs(const Tensor& x, const Tensor& lambda, int levels, bool shifted) {
  if (lambda.size() != 1) throw std::invalid_argument("qcfs: lambda must be scalar");
  if (levels < 1) throw std::invalid_argument("qcfs: levels must be >= 1");
  const double lam = lambda.data()[0];
  if (lam <= 0.0) throw std::invalid_argument("qcfs: lambda must be positive");
  std::vector<double> out(x.data());
  if (RelaxedModeGuard::active()) {
    for (double& v : out) v = std::clamp(v, 0.0, lam);
  } else {
    const double half = shifted ? 0.5 : 0.0;
    for (double& v : out) {
      v = lam * std::clamp(std::floor(v * levels / lam + half) / levels, 0.0, 1.0);
    }
  }
  return finish_op(x.shape(), std::move(out), {x, lambda}, [](TensorNode& n) {
    const auto& xd = n.parents[0].data();
    const double lam2 = n.parents[1].data()[0];
    if (n.parents[0].requires_grad()) {
      auto& g = n.parents[0].grad();
      for (size_t i = 0; i < g.size(); ++i) {
        if (xd[i] >= 0.0 && xd[i] <= lam2) g[i] += n.grad[i];
      }
    }
    if (n.parents[1].requires_grad()) {
      double acc = 0.0;
      for (size_t i = 0; i < xd.size(); ++i) {
        if (xd[i] > lam2) acc += n.grad[i];
      }
      n.parents[1].grad()[0] += acc;
    }
  });
}

Tensor spike(const Tensor& v_minus_theta) {
  constexpr double kPi = 3.14159265358979323846;
  std::vector<double> out(v_minus_theta.data());
  if (RelaxedModeGuard::active()) {
    for (double& v : out) v = std::atan(kPi * v) / kPi + 0.5;
  } else {
    for (double& v : out) v = (v >= 0.0) ? 1.0 : 0.0;
  }
  return finish_op(v_minus_theta.shape(), std::move(out), {v_minus_theta},
                   [](TensorNode& n) {
                     if (!n.parents[0].requires_grad()) return;
                     const auto& xd = n.parents[0].data();
                     auto& g = n.parents[0].grad();
                     for (size_t i = 0; i < g.size(); ++i) {
                       g[i] += n.grad[i] / (1.0 + kPi * kPi * xd[i] * xd[i]);
                     }
                   });
}

Tensor replicate_channels(const Tensor& x, int times) {
  const Shape& is = x.shape();
  if (is.size() != 4) throw std::invalid_argument("replicate_channels: expected 4-d input");
  if (times < 1) throw std::invalid_argument("replicate_channels: times must be >= 1");
  if (times == 1) {
    // still goes through an op so grads route correctly when reused
    std::vector<Tensor> parts{x};
    return concat(parts, 1);
  }
  std::vector<Tensor> parts(static_cast<size_t>(times), x);
  return concat(parts, 1);
}

double grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& fn,
                  std::vector<Tensor> inputs, double epsilon, int samples_per_input) {
  RelaxedModeGuard relaxed;

  // analytic pass
  for (auto& t : inputs) t.zero_grad();
  {
    Tape tape;
    Tensor loss = sum(fn(inputs));
    tape.backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (auto& t : inputs) analytic.push_back(t.grad());

  auto eval = [&]() {
    return sum(fn(inputs)).item();
  };

  std::mt19937_64 rng(0x5eed5eedULL);
  double max_err = 0.0;
  for (size_t k = 0; k < inputs.size(); ++k) {
    if (!inputs[k].requires_grad()) continue;
    std::vector<std::int64_t> idx;
    const std::int64_t n = inputs[k].size();
    if (samples_per_input > 0 && n > samples_per_input) {
      for (int s = 0; s < samples_per_input; ++s) {
        idx.push_back(static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n)));
      }
    } else {
      idx.resize(static_cast<size_t>(n));
      std::iota(idx.begin(), idx.end(), 0);
    }
    for (std::int64_t i : idx) {
      double& v = inputs[k].data()[static_cast<size_t>(i)];
      const double orig = v;
      v = orig + epsilon;
      const double lp = eval();
      v = orig - epsilon;
      const double lm = eval();
      v = orig;
      const double numeric = (lp - lm) / (2.0 * epsilon);
      const double err = std::abs(analytic[k][static_cast<size_t>(i)] - numeric) /
                         std::max(1.0, std::abs(numeric));
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace stflow

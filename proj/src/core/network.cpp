#include "core/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace stflow {

namespace {

ConvLayer make_conv(int cout, int cin, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (cin * 9)));
  std::vector<double> w(static_cast<size_t>(cout) * cin * 9);
  for (double& v : w) v = dist(rng);
  ConvLayer layer;
  layer.weight = Tensor::param({cout, cin, 3, 3}, std::move(w));
  // Slightly positive bias: with zero biases the stacked quantized
  // activations can collapse to an exactly-zero network at init, since any
  // pre-activation below lambda/L quantizes to 0.
  layer.bias = Tensor::param({cout}, std::vector<double>(static_cast<size_t>(cout), 0.1));
  return layer;
}

Tensor make_lambda() { return Tensor::param({1}, {0.5}); }

void visit_conv(const std::string& name, ConvLayer& layer,
                const std::function<void(const std::string&, Tensor&)>& fn) {
  fn(name + ".weight", layer.weight);
  fn(name + ".bias", layer.bias);
}

void visit_cell(const std::string& name, ConvGRUCell& cell,
                const std::function<void(const std::string&, Tensor&)>& fn) {
  visit_conv(name + ".xi_r", cell.xi_r, fn);
  visit_conv(name + ".xi_z", cell.xi_z, fn);
  visit_conv(name + ".xi_i", cell.xi_i, fn);
}

}  // namespace

Tensor ConvGRUCell::step(const Tensor& state, const Tensor& input) const {
  if (state.shape()[2] != input.shape()[2] || state.shape()[3] != input.shape()[3]) {
    throw std::invalid_argument("convgru: extent mismatch " + shape_str(state.shape()) +
                                " vs " + shape_str(input.shape()));
  }
  if (state.shape()[1] != state_channels || input.shape()[1] != in_channels) {
    throw std::invalid_argument("convgru: channel mismatch");
  }
  const Tensor si = concat({state, input}, 1);
  const Tensor r = sigmoid(conv2d(si, xi_r.weight, xi_r.bias, 1, 1));
  const Tensor z = sigmoid(conv2d(si, xi_z.weight, xi_z.bias, 1, 1));
  const Tensor h =
      tanh_(conv2d(concat({mul(r, state), input}, 1), xi_i.weight, xi_i.bias, 1, 1));
  const Tensor keep = add_scalar(scale(z, -1.0), 1.0);
  return add(mul(keep, state), mul(z, h));
}

StFlowNetParams StFlowNetParams::init(const NetworkConfig& cfg, unsigned long long seed) {
  if (cfg.base_channels < 1 || cfg.n_groups < 1 || cfg.num_decoders < 1 ||
      cfg.qcfs_levels < 1) {
    throw std::invalid_argument("network: invalid configuration");
  }
  std::mt19937_64 rng(seed);
  StFlowNetParams p;
  p.cfg = cfg;
  const int c = cfg.base_channels;
  const int in_ch = 2 * cfg.n_groups;

  p.convgru1.state_channels = in_ch;
  p.convgru1.in_channels = in_ch;
  p.convgru1.xi_r = make_conv(in_ch, 2 * in_ch, rng);
  p.convgru1.xi_z = make_conv(in_ch, 2 * in_ch, rng);
  p.convgru1.xi_i = make_conv(in_ch, 2 * in_ch, rng);

  const int enc_in[4] = {in_ch, c, 2 * c, 4 * c};
  const int enc_out[4] = {c, 2 * c, 4 * c, 8 * c};
  for (int i = 0; i < 4; ++i) {
    p.encoders[i] = make_conv(enc_out[i], enc_in[i], rng);
    p.encoder_lambda[i] = make_lambda();
  }
  for (auto& block : p.blocks) {
    block.conv1 = make_conv(8 * c, 8 * c, rng);
    block.conv2 = make_conv(8 * c, 8 * c, rng);
    block.lambda1 = make_lambda();
    block.lambda2 = make_lambda();
  }
  p.down8 = make_conv(c, c, rng);
  p.down4 = make_conv(2 * c, 2 * c, rng);
  p.down2 = make_conv(4 * c, 4 * c, rng);

  const int fused = p.fused_channels();
  p.decoders.resize(static_cast<size_t>(cfg.num_decoders));
  p.decoder_lambda.resize(static_cast<size_t>(cfg.num_decoders));
  for (int i = 0; i < cfg.num_decoders; ++i) {
    p.decoders[static_cast<size_t>(i)] = make_conv(fused, fused, rng);
    p.decoder_lambda[static_cast<size_t>(i)] = make_lambda();
  }
  p.generator = make_conv(2, fused, rng);

  p.convgru2.state_channels = 2;
  p.convgru2.in_channels = 2;
  p.convgru2.xi_r = make_conv(2, 4, rng);
  p.convgru2.xi_z = make_conv(2, 4, rng);
  p.convgru2.xi_i = make_conv(2, 4, rng);
  return p;
}

void StFlowNetParams::for_each_param(
    const std::function<void(const std::string&, Tensor&)>& fn) {
  visit_cell("convgru1", convgru1, fn);
  for (int i = 0; i < 4; ++i) {
    const std::string name = "encoder" + std::to_string(i + 1);
    visit_conv(name, encoders[i], fn);
    fn(name + ".lambda", encoder_lambda[i]);
  }
  for (int i = 0; i < 2; ++i) {
    const std::string name = "block" + std::to_string(i + 1);
    visit_conv(name + ".conv1", blocks[i].conv1, fn);
    visit_conv(name + ".conv2", blocks[i].conv2, fn);
    fn(name + ".lambda1", blocks[i].lambda1);
    fn(name + ".lambda2", blocks[i].lambda2);
  }
  visit_conv("down8", down8, fn);
  visit_conv("down4", down4, fn);
  visit_conv("down2", down2, fn);
  for (size_t i = 0; i < decoders.size(); ++i) {
    const std::string name = "decoder" + std::to_string(i + 1);
    visit_conv(name, decoders[i], fn);
    fn(name + ".lambda", decoder_lambda[i]);
  }
  visit_conv("generator", generator, fn);
  visit_cell("convgru2", convgru2, fn);
}

void StFlowNetParams::for_each_param(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
  const_cast<StFlowNetParams*>(this)->for_each_param(
      [&fn](const std::string& name, Tensor& t) { fn(name, t); });
}

std::vector<Tensor> StFlowNetParams::parameters() {
  std::vector<Tensor> out;
  for_each_param([&out](const std::string&, Tensor& t) { out.push_back(t); });
  return out;
}

Tensor normalize_counts(const Tensor& input) {
  const Shape& s = input.shape();
  const int ch = s[1];
  const std::int64_t px = static_cast<std::int64_t>(s[2]) * s[3];
  std::vector<double> out(input.data());
  for (int b = 0; b < s[0]; ++b) {
    for (int c = 0; c < ch; ++c) {
      double* plane = out.data() + (static_cast<size_t>(b) * ch + c) * px;
      double mx = 0.0;
      for (std::int64_t i = 0; i < px; ++i) mx = std::max(mx, std::abs(plane[i]));
      if (mx > 0.0) {
        for (std::int64_t i = 0; i < px; ++i) plane[i] /= mx;
      }
    }
  }
  return Tensor::from_data(s, std::move(out));
}

Tensor residual_block(const ResidualBlock& block, const Tensor& x, int levels,
                      bool shifted) {
  const Tensor inner =
      qcfs(conv2d(x, block.conv1.weight, block.conv1.bias, 1, 1), block.lambda1, levels,
           shifted);
  const Tensor outer = conv2d(inner, block.conv2.weight, block.conv2.bias, 1, 1);
  return qcfs(add(outer, x), block.lambda2, levels, shifted);
}

Tensor forward_ann(const StFlowNetParams& p, const Tensor& input, ModelState& state) {
  const Shape& s = input.shape();
  if (s.size() != 4 || s[1] != 2 * p.cfg.n_groups) {
    throw std::invalid_argument("forward_ann: expected [1," +
                                std::to_string(2 * p.cfg.n_groups) + ",H,W], got " +
                                shape_str(s));
  }
  const int height = s[2], width = s[3];
  if (height % 16 != 0 || width % 16 != 0) {
    throw std::invalid_argument("forward_ann: extents must be divisible by 16");
  }
  const int levels = p.cfg.qcfs_levels;
  const bool shifted = p.cfg.qcfs_shifted;

  const Tensor x = normalize_counts(input);
  Tensor prev = state.prev_flow.defined() ? state.prev_flow
                                          : Tensor::zeros({1, 2, height, width});
  const Tensor lifted = replicate_channels(prev, p.cfg.n_groups);
  const Tensor augmented = p.convgru1.step(lifted, x);

  Tensor feats[4];
  Tensor cur = augmented;
  for (int i = 0; i < 4; ++i) {
    cur = qcfs(conv2d(cur, p.encoders[i].weight, p.encoders[i].bias, 2, 1),
               p.encoder_lambda[i], levels, shifted);
    feats[i] = cur;
  }
  Tensor deep = residual_block(p.blocks[0], feats[3], levels, shifted);
  deep = residual_block(p.blocks[1], deep, levels, shifted);

  const Tensor fused = concat({conv2d(feats[0], p.down8.weight, p.down8.bias, 8, 1),
                               conv2d(feats[1], p.down4.weight, p.down4.bias, 4, 1),
                               conv2d(feats[2], p.down2.weight, p.down2.bias, 2, 1),
                               deep},
                              1);
  Tensor decoded = bilinear_upsample(fused, 2);
  for (size_t i = 0; i < p.decoders.size(); ++i) {
    decoded = qcfs(conv2d(decoded, p.decoders[i].weight, p.decoders[i].bias, 1, 1),
                   p.decoder_lambda[i], levels, shifted);
  }
  Tensor basic = conv2d(decoded, p.generator.weight, p.generator.bias, 1, 1);
  basic = bilinear_upsample(basic, height / basic.shape()[2]);

  const Tensor flow = p.convgru2.step(prev, basic);
  state.prev_flow = flow;
  return flow;
}

FlowField tensor_to_flow(const Tensor& t) {
  const Shape& s = t.shape();
  if (s.size() != 4 || s[0] != 1 || s[1] != 2) {
    throw std::invalid_argument("tensor_to_flow: expected [1,2,H,W], got " + shape_str(s));
  }
  FlowField f(s[3], s[2]);
  const size_t px = f.u.size();
  std::copy(t.data().begin(), t.data().begin() + static_cast<std::ptrdiff_t>(px),
            f.u.begin());
  std::copy(t.data().begin() + static_cast<std::ptrdiff_t>(px), t.data().end(),
            f.v.begin());
  return f;
}

Tensor flow_to_tensor(const FlowField& f) {
  std::vector<double> data;
  data.reserve(2 * f.u.size());
  data.insert(data.end(), f.u.begin(), f.u.end());
  data.insert(data.end(), f.v.begin(), f.v.end());
  return Tensor::from_data({1, 2, f.height, f.width}, std::move(data));
}

}  // namespace stflow

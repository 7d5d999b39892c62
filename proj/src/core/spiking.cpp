#include "core/spiking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stflow {

void lif_step(std::vector<double>& v, std::vector<double>& s_prev,
              const std::vector<double>& current, const LIFConfig& cfg) {
  if (v.size() != current.size() || s_prev.size() != current.size()) {
    throw std::invalid_argument("lif_step: shape mismatch");
  }
  const double decay = std::exp(-cfg.tau);
  for (size_t i = 0; i < v.size(); ++i) {
    if (cfg.reset == ResetMode::kSoft) {
      v[i] = decay * v[i] - s_prev[i] * cfg.theta + current[i];
    } else {
      v[i] = decay * v[i] * (1.0 - s_prev[i]) + current[i];
    }
    s_prev[i] = (v[i] >= cfg.theta) ? 1.0 : 0.0;
  }
}

std::vector<std::string> spiking_site_names(const NetworkConfig& cfg) {
  std::vector<std::string> names;
  for (int i = 1; i <= 4; ++i) names.push_back("encoder" + std::to_string(i));
  for (int b = 1; b <= 2; ++b) {
    names.push_back("block" + std::to_string(b) + ".theta1");
    names.push_back("block" + std::to_string(b) + ".theta2");
  }
  for (int i = 1; i <= cfg.num_decoders; ++i) {
    names.push_back("decoder" + std::to_string(i));
  }
  return names;
}

StFlowNetParams clone_params(const StFlowNetParams& src) {
  StFlowNetParams out = src;
  out.for_each_param([](const std::string&, Tensor& t) {
    Tensor copy = Tensor::from_data(t.shape(), t.data());
    copy.set_requires_grad(t.requires_grad());
    t = copy;
  });
  return out;
}

SpikingModel convert_a2s(const StFlowNetParams& ann, int time_window,
                         double tau_generator, double tau_convgru2) {
  if (time_window < 1) throw std::invalid_argument("convert_a2s: T must be >= 1");
  SpikingModel m;
  m.params = clone_params(ann);
  m.time_window = time_window;
  m.inner_repeats = std::max(1, time_window / ann.cfg.n_groups);
  m.tau_generator = tau_generator;
  m.tau_convgru2 = tau_convgru2;
  m.reset = ResetMode::kSoft;

  const NetworkConfig& cfg = ann.cfg;
  for (int i = 0; i < 4; ++i) {
    m.theta["encoder" + std::to_string(i + 1)] = ann.encoder_lambda[i].data()[0];
  }
  for (int b = 0; b < 2; ++b) {
    m.theta["block" + std::to_string(b + 1) + ".theta1"] = ann.blocks[b].lambda1.data()[0];
    m.theta["block" + std::to_string(b + 1) + ".theta2"] = ann.blocks[b].lambda2.data()[0];
  }
  for (int i = 0; i < cfg.num_decoders; ++i) {
    m.theta["decoder" + std::to_string(i + 1)] =
        ann.decoder_lambda[static_cast<size_t>(i)].data()[0];
  }
  return m;
}

namespace {

struct LifSiteState {
  Tensor v;
  Tensor s_prev;
};

// Walks spiking sites in a fixed order each step; owns their membrane state.
class LifBank {
 public:
  LifBank(const SpikingModel& model, SnnDiagnostics* diag)
      : model_(model), diag_(diag) {}

  void begin_step() { next_ = 0; }

  // current -> theta-scaled spike output
  Tensor fire(const std::string& site, const Tensor& current) {
    const double theta = model_.theta.at(site);
    const double decay = 1.0;  // tau = 0 everywhere except generator/convgru2
    if (next_ == states_.size()) {
      // The shifted quantizer pairs with a half-threshold pre-charge; the
      // unshifted one with a zero start (both exact for constant currents).
      Tensor v0 = Tensor::zeros(current.shape());
      if (model_.params.cfg.qcfs_shifted) v0 = add_scalar(v0, theta * 0.5);
      states_.push_back({v0, Tensor::zeros(current.shape())});
    }
    LifSiteState& st = states_[next_++];
    if (st.v.shape() != current.shape()) {
      throw std::invalid_argument("forward_snn: state shape changed between steps");
    }
    Tensor v_new;
    if (model_.reset == ResetMode::kSoft) {
      v_new = add(sub(scale(st.v, decay), scale(st.s_prev, theta)), current);
    } else {
      const Tensor not_fired = add_scalar(scale(st.s_prev, -1.0), 1.0);
      v_new = add(mul(scale(st.v, decay), not_fired), current);
    }
    const Tensor s = spike(add_scalar(v_new, -theta));
    st.v = v_new;
    st.s_prev = s;
    if (diag_) {
      double mean = 0.0;
      for (double x : s.data()) mean += x;
      diag_->rates[site].push_back(mean / static_cast<double>(s.size()));
    }
    return scale(s, theta);
  }

 private:
  const SpikingModel& model_;
  SnnDiagnostics* diag_;
  std::vector<LifSiteState> states_;
  size_t next_ = 0;
};

Tensor residual_block_snn(const ResidualBlock& block, const Tensor& x, LifBank& bank,
                          const std::string& prefix) {
  const Tensor inner =
      bank.fire(prefix + ".theta1", conv2d(x, block.conv1.weight, block.conv1.bias, 1, 1));
  const Tensor outer = conv2d(inner, block.conv2.weight, block.conv2.bias, 1, 1);
  return bank.fire(prefix + ".theta2", add(outer, x));
}

}  // namespace

SpikingRun forward_snn(const SpikingModel& model, const std::vector<Tensor>& step_inputs) {
  if (step_inputs.empty()) throw std::invalid_argument("forward_snn: empty input sequence");
  const StFlowNetParams& p = model.params;
  const int n = static_cast<int>(step_inputs.size());
  if (n != p.cfg.n_groups) {
    throw std::invalid_argument("forward_snn: expected " + std::to_string(p.cfg.n_groups) +
                                " group tensors, got " + std::to_string(n));
  }
  const Shape& s0 = step_inputs[0].shape();
  if (s0.size() != 4 || s0[1] != 2) {
    throw std::invalid_argument("forward_snn: step inputs must be [1,2,H,W]");
  }
  const int height = s0[2], width = s0[3];
  if (height % 16 != 0 || width % 16 != 0) {
    throw std::invalid_argument("forward_snn: extents must be divisible by 16");
  }

  // Normalize across the full window (same scaling as the ANN path), then
  // place each pair in its temporal channel slot so first-layer weights stay
  // shape-identical to the ANN.
  const Tensor full = normalize_counts(concat(step_inputs, 1));
  const size_t px = static_cast<size_t>(height) * width;
  // Each slot is active for 1/N of the window, so scale it by N to keep the
  // time-averaged first-layer current equal to the analog model's.
  std::vector<Tensor> slotted;
  slotted.reserve(static_cast<size_t>(n));
  for (int g = 0; g < n; ++g) {
    std::vector<double> data(static_cast<size_t>(2 * n) * px, 0.0);
    const double* src = full.data().data() + static_cast<size_t>(2 * g) * px;
    for (size_t i = 0; i < 2 * px; ++i) {
      data[static_cast<size_t>(2 * g) * px + i] = src[i] * static_cast<double>(n);
    }
    slotted.push_back(Tensor::from_data({1, 2 * n, height, width}, std::move(data)));
  }

  SpikingRun run;
  LifBank bank(model, &run.diag);
  const double gen_decay = std::exp(-model.tau_generator);
  const double gru2_decay = std::exp(-model.tau_convgru2);

  Tensor prev_flow = Tensor::zeros({1, 2, height, width});
  Tensor gen_v;          // generator membrane potential, accumulated readout
  double gen_w = 0.0;    // accumulated decay weight, normalizes the readout
  Tensor flow;

  for (int g = 0; g < n; ++g) {
    for (int rep = 0; rep < model.inner_repeats; ++rep) {
      bank.begin_step();
      const Tensor lifted = replicate_channels(prev_flow, p.cfg.n_groups);
      const Tensor augmented = p.convgru1.step(lifted, slotted[static_cast<size_t>(g)]);

      Tensor feats[4];
      Tensor cur = augmented;
      for (int i = 0; i < 4; ++i) {
        cur = bank.fire("encoder" + std::to_string(i + 1),
                        conv2d(cur, p.encoders[i].weight, p.encoders[i].bias, 2, 1));
        feats[i] = cur;
      }
      Tensor deep = residual_block_snn(p.blocks[0], feats[3], bank, "block1");
      deep = residual_block_snn(p.blocks[1], deep, bank, "block2");

      const Tensor fused = concat({conv2d(feats[0], p.down8.weight, p.down8.bias, 8, 1),
                                   conv2d(feats[1], p.down4.weight, p.down4.bias, 4, 1),
                                   conv2d(feats[2], p.down2.weight, p.down2.bias, 2, 1),
                                   deep},
                                  1);
      Tensor decoded = bilinear_upsample(fused, 2);
      for (size_t i = 0; i < p.decoders.size(); ++i) {
        decoded = bank.fire("decoder" + std::to_string(i + 1),
                            conv2d(decoded, p.decoders[i].weight, p.decoders[i].bias, 1, 1));
      }
      const Tensor gen_current =
          conv2d(decoded, p.generator.weight, p.generator.bias, 1, 1);
      gen_v = gen_v.defined() ? add(scale(gen_v, gen_decay), gen_current) : gen_current;
      gen_w = gen_w * gen_decay + 1.0;

      // Normalized membrane readout: the accumulated generator potential is
      // divided by the accumulated decay weight, so the decoded flow tracks
      // the running (leaky) average of the per-step currents instead of
      // growing with the step count.
      const Tensor readout = scale(gen_v, 1.0 / gen_w);
      const Tensor basic = bilinear_upsample(readout, height / gen_v.shape()[2]);
      flow = p.convgru2.step(scale(prev_flow, gru2_decay), basic);
      prev_flow = flow;
    }
  }
  run.flow = flow;
  return run;
}

std::map<std::string, double> firing_report(const SnnDiagnostics& diag) {
  std::map<std::string, double> out;
  for (const auto& [site, rates] : diag.rates) {
    double acc = 0.0;
    for (double r : rates) acc += r;
    out[site] = rates.empty() ? 0.0 : acc / static_cast<double>(rates.size());
  }
  return out;
}

}  // namespace stflow

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/flow.hpp"
#include "core/tensor.hpp"

namespace stflow {

struct NetworkConfig {
  int base_channels = 32;
  int n_groups = 2;     // N input frame groups; ANN input has 2N channels
  int num_decoders = 1;
  int qcfs_levels = 4;  // L
  bool qcfs_shifted = false;
};

struct ConvLayer {
  Tensor weight;  // [Cout, Cin, 3, 3]
  Tensor bias;    // [Cout]
};

/// Gated recurrent cell with convolutional gates over (state, input)
/// channel concatenation. Output shape equals the state shape.
struct ConvGRUCell {
  ConvLayer xi_r, xi_z, xi_i;
  int state_channels = 0;
  int in_channels = 0;

  Tensor step(const Tensor& state, const Tensor& input) const;
};

struct ResidualBlock {
  ConvLayer conv1, conv2;
  Tensor lambda1, lambda2;  // QCFS ceilings after conv1 and after the skip add
};

struct StFlowNetParams {
  NetworkConfig cfg;
  ConvGRUCell convgru1;               // input augmentation, 2N-channel state
  ConvLayer encoders[4];              // stride-2, channel-doubling
  Tensor encoder_lambda[4];
  ResidualBlock blocks[2];
  ConvLayer down8, down4, down2;      // fusion downsamplers
  std::vector<ConvLayer> decoders;    // equal in/out channels
  std::vector<Tensor> decoder_lambda;
  ConvLayer generator;                // two output filters
  ConvGRUCell convgru2;               // flow alignment, 2-channel state

  static StFlowNetParams init(const NetworkConfig& cfg, unsigned long long seed);

  // Visits every learnable tensor with its canonical checkpoint name.
  void for_each_param(const std::function<void(const std::string&, Tensor&)>& fn);
  void for_each_param(const std::function<void(const std::string&, const Tensor&)>& fn) const;
  std::vector<Tensor> parameters();
  int fused_channels() const { return 15 * cfg.base_channels; }
};

struct ModelState {
  Tensor prev_flow;  // [1,2,H,W]; undefined means the zero initial state
};

// Divides each channel by its own max when nonzero; idempotent.
Tensor normalize_counts(const Tensor& input);

Tensor residual_block(const ResidualBlock& block, const Tensor& x, int levels, bool shifted);

// Full ANN pipeline: augmentation, encoders, blocks, fusion, decoders,
// generator, alignment. Returns the full-resolution flow tensor [1,2,H,W]
// and stores it in state for the next step.
Tensor forward_ann(const StFlowNetParams& params, const Tensor& input, ModelState& state);

FlowField tensor_to_flow(const Tensor& t);
Tensor flow_to_tensor(const FlowField& f);

}  // namespace stflow

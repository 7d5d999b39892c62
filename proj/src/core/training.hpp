#pragma once

#include <string>
#include <vector>

#include "core/events.hpp"
#include "core/network.hpp"
#include "core/spiking.hpp"
#include "core/tensor.hpp"

namespace stflow {

struct LossConfig {
  double lambda_smooth = 0.001;
  double charb_eps = 1e-3;
  double charb_alpha = 0.5;
  double eps_w = 1e-9;
};

// Average-timestamp contrast loss: events warped by the flow to both window
// edges, bilinearly splatted into per-polarity timestamp images; the loss is
// the normalized sum of squared average timestamps at both references.
// Differentiable in flow.
Tensor contrast_loss_op(const Tensor& flow, const EventStream& events,
                        double t_start, double t_end, const LossConfig& cfg);

// Charbonnier penalty over 4-neighbor flow differences, both components.
Tensor smoothness_loss_op(const Tensor& flow, const LossConfig& cfg);

Tensor total_loss_op(const Tensor& flow, const EventStream& events,
                     double t_start, double t_end, const LossConfig& cfg);

// Plain-value wrappers used by the metrics.
double contrast_loss(const FlowField& flow, const EventStream& events,
                     double t_start, double t_end, const LossConfig& cfg = {});
double smoothness_loss(const FlowField& flow, const LossConfig& cfg = {});
double total_loss(const FlowField& flow, const EventStream& events,
                  const LossConfig& cfg = {});

class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<Tensor> params, double lr,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void zero_grad();
  void step();
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  int steps() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
};

struct TrainConfig {
  int epochs_ann = 100;
  int epochs_bisnn = 10;
  int batch_size = 8;
  double lr = 2e-4;
  double lr_gamma = 0.98;  // exponential decay per epoch
  unsigned long long seed = 0;
  int max_iters = 0;  // 0 = no cap
};

struct TrainSample {
  EventStream events;
};
using Dataset = std::vector<TrainSample>;

struct LossRow {
  int iter = 0;
  int epoch = 0;
  double contrast = 0.0;
  double smooth = 0.0;
  double total = 0.0;
  double lr = 0.0;
};

void write_loss_csv(const std::string& path, const std::vector<LossRow>& rows);

std::vector<LossRow> train_ann(StFlowNetParams& params, const Dataset& dataset,
                               const TrainConfig& cfg, const LossConfig& loss_cfg = {});

// A2S initialization followed by STBP retraining of the weights; theta and
// tau stay fixed.
SpikingModel bisnn_train(const StFlowNetParams& ann, const Dataset& dataset,
                         const TrainConfig& cfg, double tau_generator = 0.0,
                         double tau_convgru2 = 0.0, const LossConfig& loss_cfg = {},
                         std::vector<LossRow>* history = nullptr);

// Same loop from random initialization; biological parameters initialized as
// in the BISNN method.
SpikingModel direct_stbp_train(const NetworkConfig& net_cfg, const Dataset& dataset,
                               const TrainConfig& cfg, double tau_generator = 0.0,
                               double tau_convgru2 = 0.0, const LossConfig& loss_cfg = {},
                               std::vector<LossRow>* history = nullptr);

}  // namespace stflow

#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/network.hpp"
#include "core/tensor.hpp"

namespace stflow {

enum class ResetMode { kSoft, kHard };

struct LIFConfig {
  double theta = 1.0;
  double tau = 0.0;  // decay multiplier is e^(-tau)
  ResetMode reset = ResetMode::kSoft;
};

// Plain (untaped) membrane update for one layer slice; spec-level primitive.
// v and s_prev updated in place, returns the new spikes in s_prev.
void lif_step(std::vector<double>& v, std::vector<double>& s_prev,
              const std::vector<double>& current, const LIFConfig& cfg);

// Spiking sites, in execution order: each carries a QCFS ceiling in the ANN
// and a firing threshold in the SNN.
std::vector<std::string> spiking_site_names(const NetworkConfig& cfg);

struct SpikingModel {
  StFlowNetParams params;                 // deep copy of the ANN weights
  std::map<std::string, double> theta;    // per spiking site
  double tau_generator = 0.0;             // tau0
  double tau_convgru2 = 0.0;              // tau1
  int time_window = 1;                    // T
  int inner_repeats = 1;                  // steps per input group
  ResetMode reset = ResetMode::kSoft;
};

StFlowNetParams clone_params(const StFlowNetParams& src);

// theta := lambda per QCFS site; weights copied verbatim; soft reset.
SpikingModel convert_a2s(const StFlowNetParams& ann, int time_window,
                         double tau_generator = 0.0, double tau_convgru2 = 0.0);

struct SnnDiagnostics {
  // site -> firing rate per step (mean over elements)
  std::map<std::string, std::vector<double>> rates;
};

struct SpikingRun {
  Tensor flow;  // final-step output, [1,2,H,W]
  SnnDiagnostics diag;
};

// Runs the spiking pipeline over the group sequence (T = N * inner_repeats
// steps). Analog modules carry real values; spiking layers carry {0,1}*theta.
// Differentiable when called under a Tape (surrogate spike backward).
SpikingRun forward_snn(const SpikingModel& model, const std::vector<Tensor>& step_inputs);

// Mean firing rate per site, averaged over steps.
std::map<std::string, double> firing_report(const SnnDiagnostics& diag);

}  // namespace stflow

#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/network.hpp"
#include "core/spiking.hpp"

namespace stflow {

struct EnergyConstants {
  double e_mac = 4.6e-12;  // joules per multiply-accumulate
  double e_ac = 0.9e-12;   // joules per accumulate
};

struct LayerCount {
  std::string name;
  std::string kind;  // "MAC" or "AC"
  double ops = 0.0;  // dense synaptic ops for a single pass / step
  double rate = 1.0; // input firing rate (1 for MAC layers)
  double energy_j = 0.0;  // includes the T factor for spiking reports
  std::string rationale;
};

struct OpCountReport {
  std::vector<LayerCount> layers;
  double activation_ops = 0.0;  // gate/activation evaluations, kept out of totals
  double total_energy_j = 0.0;
  int time_window = 1;

  double per_step_energy_j() const {
    return total_energy_j / static_cast<double>(time_window);
  }
};

// Every conv counted as Cout*H'*W'*Cin*kH*kW MACs for one forward pass.
OpCountReport count_ann_ops(const StFlowNetParams& params, int height, int width,
                            const EnergyConstants& c = {});

// AC layers are the convs whose input is a spike train; ConvGRU1/2, Encoder1
// and Decoder1 stay MAC. AC energy = dense ops * input rate * T * e_ac.
OpCountReport count_snn_ops(const SpikingModel& model,
                            const std::map<std::string, double>& firing, int height,
                            int width, const EnergyConstants& c = {});

// Relative energy consumption, Phi_SNN / Phi_ANN (T inside Phi_SNN).
double rec(const OpCountReport& ann, const OpCountReport& snn);

// Same ratio with the spiking total amortized over its T steps.
double rec_per_step(const OpCountReport& ann, const OpCountReport& snn);

void write_energy_csv(const std::string& path, const OpCountReport& ann,
                      const OpCountReport& snn);

}  // namespace stflow

#pragma once

#include <string>
#include <vector>

#include "core/energy.hpp"
#include "core/events.hpp"
#include "core/network.hpp"
#include "core/training.hpp"

namespace stflow {

// Flat key=value run configuration. Every key has a documented default;
// unknown keys are rejected.
struct RunConfig {
  // model
  int base_channels = 32;
  int groups = 2;
  int decoders = 1;
  int levels = 4;
  bool shifted = false;
  // spiking
  int time_window = 0;  // 0 = number of groups
  double tau0 = 0.0;
  double tau1 = 0.0;
  std::string reset = "soft";
  // training
  int epochs = 100;
  int epochs_bisnn = 10;
  int batch = 8;
  double lr = 2e-4;
  double lr_gamma = 0.98;
  int max_iters = 0;
  double lambda_smooth = 0.001;
  double charb_eps = 1e-3;
  unsigned long long seed = 0;
  // synthetic data
  int width = 32;
  int height = 32;
  double density = 0.5;
  double vx = 3.0;
  double vy = 0.0;
  double duration = 1.0;
  int samples = 16;
  // energy
  double e_mac = 4.6e-12;
  double e_ac = 0.9e-12;
  // sweep
  int grid = 5;
  double tau_max = 0.8;
};

struct ConfigKeyDoc {
  std::string key;
  std::string def;  // default, rendered
  std::string doc;
};

std::vector<ConfigKeyDoc> config_schema();

// Throws std::invalid_argument on unknown key or unparsable value.
void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

// `key=value` lines; '#' comments and blank lines ignored.
void load_config_file(RunConfig& cfg, const std::string& path);

NetworkConfig network_config(const RunConfig& cfg);
TrainConfig train_config(const RunConfig& cfg);
LossConfig loss_config(const RunConfig& cfg);
SynthConfig synth_config(const RunConfig& cfg);
EnergyConstants energy_constants(const RunConfig& cfg);
int effective_time_window(const RunConfig& cfg);

}  // namespace stflow

#pragma once

#include <string>

#include "core/network.hpp"
#include "core/spiking.hpp"

namespace stflow {

enum class ModelKind { kAnn, kSnn };

// STFW container: magic, u32 version, u32 header (base_channels, N, #Ds, L,
// H, W), then named f32 tensors. H/W record the extents the model was last
// run at (0 = unknown). Spiking checkpoints add *.theta, tau.* and meta.*
// scalar entries.

void save_ann(const std::string& path, const StFlowNetParams& params, int height = 0,
              int width = 0);
StFlowNetParams load_ann(const std::string& path, int* height = nullptr,
                         int* width = nullptr);

void save_snn(const std::string& path, const SpikingModel& model, int height = 0,
              int width = 0);
SpikingModel load_snn(const std::string& path, int* height = nullptr,
                      int* width = nullptr);

ModelKind peek_kind(const std::string& path);

}  // namespace stflow

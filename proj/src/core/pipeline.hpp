#pragma once

#include <string>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/eval.hpp"
#include "core/events.hpp"
#include "core/network.hpp"
#include "core/spiking.hpp"
#include "core/training.hpp"

namespace stflow {

// Seeded translating-dot streams; sample i uses seed cfg.seed + i.
Dataset make_synth_dataset(const RunConfig& cfg);

FlowField infer_ann(const StFlowNetParams& params, const EventStream& events);
FlowField infer_snn(const SpikingModel& model, const EventStream& events,
                    SnnDiagnostics* diag = nullptr);

// Checkpoint-kind dispatching inference.
FlowField infer_checkpoint(const std::string& ckpt_path, const EventStream& events);

MetricReport evaluate_checkpoint(const std::string& ckpt_path, const EventStream& events,
                                 const GroundTruthFlow& gt, const std::string& scenario);

struct SweepCell {
  double tau0 = 0.0;
  double tau1 = 0.0;
  MetricReport metrics;
};

// tau0 x tau1 grid over [0, tau_max]; A2S conversion per cell, optional
// spiking retraining when retrain_epochs > 0.
std::vector<SweepCell> sweep_taus(const StFlowNetParams& ann, const Dataset& train_data,
                                  const EventStream& eval_events,
                                  const GroundTruthFlow& gt, const RunConfig& cfg,
                                  int retrain_epochs);

void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& cells);

}  // namespace stflow

#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "core/events.hpp"
#include "core/flow.hpp"
#include "core/training.hpp"

namespace stflow {

struct WarpedEventImage {
  int width = 0;
  int height = 0;
  double t_ref = 0.0;
  double dt = 0.0;
  std::vector<double> count_pos, count_neg;  // IWE, bilinear mass
  std::vector<double> tavg_pos, tavg_neg;    // average normalized timestamp
  double clipped_mass = 0.0;                 // splatted outside the frame

  std::vector<double> count_sum() const;
};

// Each event moves by (t_ref - t)/dt * flow at its integer pixel.
WarpedEventImage warp_events(const EventStream& events, const FlowField& flow,
                             double t_ref, double dt);

// Pixels that received at least one input event.
std::vector<std::uint8_t> event_count_mask(const EventStream& events);

// Mean endpoint error over gt-valid pixels intersected with event_mask.
std::optional<double> aee(const FlowField& pred, const GroundTruthFlow& gt,
                          const std::vector<std::uint8_t>& event_mask);

enum class AeeMode { kDt1, kDt4 };

// dt1: one prediction from the whole window. dt4: four predictions from
// index quartiles, summed into one displacement.
std::optional<double> aee_windows(
    const std::function<FlowField(const EventStream&)>& pred_fn,
    const EventStream& events, const GroundTruthFlow& gt, AeeMode mode);

// Variance ratio of the polarity-summed warped vs unwarped count image.
std::optional<double> fwl(const EventStream& events, const FlowField& flow, double dt);

// Contrast-loss ratio against the zero-flow baseline.
std::optional<double> rsat(const EventStream& events, const FlowField& flow,
                           const LossConfig& cfg = {});

struct MetricReport {
  std::string scenario;
  std::optional<double> aee1, aee4, fwl, rsat;
};

void write_metric_csv(const std::string& path, const std::vector<MetricReport>& reports);
void print_metric_table(std::ostream& out, const std::vector<MetricReport>& reports);

}  // namespace stflow

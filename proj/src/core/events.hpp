#pragma once

#include <string>
#include <utility>
#include <vector>

#include "core/flow.hpp"
#include "core/tensor.hpp"

namespace stflow {

struct Event {
  int x = 0;
  int y = 0;
  double t = 0.0;
  int p = 1;  // +1 or -1
};

struct EventStream {
  int width = 0;
  int height = 0;
  std::vector<Event> events;  // non-decreasing in t

  size_t count() const { return events.size(); }
  double t_start() const { return events.empty() ? 0.0 : events.front().t; }
  double t_end() const { return events.empty() ? 0.0 : events.back().t; }
};

/// N pairs of per-polarity count images accumulated over contiguous
/// index slices of the stream.
struct EventFrameGroups {
  int width = 0;
  int height = 0;
  int n_groups = 0;
  std::vector<std::vector<double>> pos;  // n_groups images, H*W counts
  std::vector<std::vector<double>> neg;
  double window_start = 0.0;
  double window_end = 0.0;
};

enum class EventFormat { kText, kBinary };

EventStream load_events(const std::string& path, EventFormat format);
void write_events(const std::string& path, const EventStream& stream, EventFormat format);

// Group n accumulates event indices in (floor(K(n-1)/N), floor(Kn/N)].
EventFrameGroups group_events(const EventStream& stream, int n_groups);

// [1, 2N, H, W] with channel order f1+, f1-, ..., fN+, fN-.
Tensor to_ann_input(const EventFrameGroups& groups);

// N tensors of [1, 2, H, W] in temporal order.
std::vector<Tensor> to_snn_input(const EventFrameGroups& groups);

struct SynthConfig {
  int width = 32;
  int height = 32;
  double density = 0.5;  // events per pixel
  double vx = 0.0;       // pixels over the window
  double vy = 0.0;
  double duration = 1.0;  // seconds
  unsigned long long seed = 0;
};

// Translating random dot pattern with analytically known constant flow.
std::pair<EventStream, GroundTruthFlow> synth_translating_pattern(const SynthConfig& cfg);

}  // namespace stflow

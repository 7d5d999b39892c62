#pragma once

#include <cstdint>
#include <vector>

namespace stflow {

/// Per-pixel 2-d displacement in pixels over the prediction window.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> u;  // row-major H*W
  std::vector<double> v;

  FlowField() = default;
  FlowField(int w, int h)
      : width(w), height(h),
        u(static_cast<size_t>(w) * h, 0.0),
        v(static_cast<size_t>(w) * h, 0.0) {}

  double& u_at(int y, int x) { return u[static_cast<size_t>(y) * width + x]; }
  double& v_at(int y, int x) { return v[static_cast<size_t>(y) * width + x]; }
  double u_at(int y, int x) const { return u[static_cast<size_t>(y) * width + x]; }
  double v_at(int y, int x) const { return v[static_cast<size_t>(y) * width + x]; }
};

struct GroundTruthFlow {
  FlowField flow;
  std::vector<std::uint8_t> valid_mask;  // H*W, nonzero = valid
};

}  // namespace stflow

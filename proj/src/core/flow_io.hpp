#pragma once

#include <string>
#include <vector>

#include "core/flow.hpp"

namespace stflow {

// Middlebury .flo: "PIEH" float magic, i32 width, i32 height, interleaved
// (u, v) f32 row-major, little-endian.
void write_flo(const std::string& path, const FlowField& flow);
FlowField read_flo(const std::string& path);

// Validity mask as binary PGM (P5, maxval 255), nonzero = valid.
void write_mask_pgm(const std::string& path, int width, int height,
                    const std::vector<std::uint8_t>& mask);
std::vector<std::uint8_t> read_mask_pgm(const std::string& path, int* width, int* height);

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major
};

// Middlebury-style color wheel: hue from atan2(v, u), saturation from
// magnitude over the 99th-percentile magnitude. Zero flow is white.
Image render_flow(const FlowField& flow);

void write_ppm(const std::string& path, const Image& img);

}  // namespace stflow

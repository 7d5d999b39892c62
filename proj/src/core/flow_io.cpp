#include "core/flow_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace stflow {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

template <typename T>
void put_le(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

constexpr float kFloMagic = 202021.25f;  // spells "PIEH" in LE bytes

}  // namespace

void write_flo(const std::string& path, const FlowField& flow) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write " + path);
  put_le<float>(out, kFloMagic);
  put_le<std::int32_t>(out, flow.width);
  put_le<std::int32_t>(out, flow.height);
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      put_le<float>(out, static_cast<float>(flow.u_at(y, x)));
      put_le<float>(out, static_cast<float>(flow.v_at(y, x)));
    }
  }
}

FlowField read_flo(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path);
  const float magic = get_le<float>(in);
  if (magic != kFloMagic) fail(path + ": not a .flo file");
  const auto w = get_le<std::int32_t>(in);
  const auto h = get_le<std::int32_t>(in);
  if (w <= 0 || h <= 0 || w > 1 << 16 || h > 1 << 16) fail(path + ": bad extents");
  FlowField f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      f.u_at(y, x) = get_le<float>(in);
      f.v_at(y, x) = get_le<float>(in);
    }
  }
  if (!in) fail(path + ": truncated");
  return f;
}

void write_mask_pgm(const std::string& path, int width, int height,
                    const std::vector<std::uint8_t>& mask) {
  if (mask.size() != static_cast<size_t>(width) * height) fail("mask extent mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write " + path);
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(mask.data()), static_cast<std::streamsize>(mask.size()));
}

std::vector<std::uint8_t> read_mask_pgm(const std::string& path, int* width, int* height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path);
  std::string magic;
  int w, h, maxval;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w <= 0 || h <= 0) fail(path + ": not a P5 PGM");
  in.get();  // single whitespace after header
  std::vector<std::uint8_t> mask(static_cast<size_t>(w) * h);
  in.read(reinterpret_cast<char*>(mask.data()), static_cast<std::streamsize>(mask.size()));
  if (!in) fail(path + ": truncated");
  if (width) *width = w;
  if (height) *height = h;
  return mask;
}

Image render_flow(const FlowField& flow) {
  const size_t n = flow.u.size();
  std::vector<double> mag(n);
  for (size_t i = 0; i < n; ++i) mag[i] = std::hypot(flow.u[i], flow.v[i]);
  std::vector<double> sorted = mag;
  std::sort(sorted.begin(), sorted.end());
  double norm = sorted.empty() ? 0.0 : sorted[static_cast<size_t>(0.99 * (n - 1))];
  if (norm <= 0.0) norm = 1.0;

  Image img;
  img.width = flow.width;
  img.height = flow.height;
  img.rgb.resize(3 * n);
  for (size_t i = 0; i < n; ++i) {
    const double sat = std::min(1.0, mag[i] / norm);
    const double hue = std::atan2(flow.v[i], flow.u[i]);  // [-pi, pi]
    // hue -> rgb on a 6-sector wheel, then blend toward white by 1 - sat
    const double hh = (hue / (2.0 * M_PI) + 0.5) * 6.0;  // [0, 6)
    const int sector = std::min(5, static_cast<int>(hh));
    const double f = hh - sector;
    double r = 0, g = 0, b = 0;
    switch (sector) {
      case 0: r = 1; g = f; break;
      case 1: r = 1 - f; g = 1; break;
      case 2: g = 1; b = f; break;
      case 3: g = 1 - f; b = 1; break;
      case 4: b = 1; r = f; break;
      default: b = 1 - f; r = 1; break;
    }
    img.rgb[3 * i + 0] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - sat * (1.0 - r))));
    img.rgb[3 * i + 1] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - sat * (1.0 - g))));
    img.rgb[3 * i + 2] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - sat * (1.0 - b))));
  }
  return img;
}

void write_ppm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
}

}  // namespace stflow

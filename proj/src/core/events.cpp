#include "core/events.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
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

void sort_by_time(EventStream& s) {
  std::stable_sort(s.events.begin(), s.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
}

EventStream load_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  EventStream s;
  bool size_known = false;
  std::string line;
  int line_no = 0;
  int max_x = -1, max_y = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      if (hs >> key && key == "size") {
        int w = 0, h = 0;
        if (hs >> w >> h && w > 0 && h > 0) {
          s.width = w;
          s.height = h;
          size_known = true;
        }
      }
      continue;
    }
    std::istringstream ls(line);
    double t;
    long x, y;
    int p;
    if (!(ls >> t >> x >> y >> p) || (p != 0 && p != 1)) {
      fail(path + ":" + std::to_string(line_no) + ": malformed event line");
    }
    if (x < 0 || y < 0 || (size_known && (x >= s.width || y >= s.height))) {
      fail(path + ":" + std::to_string(line_no) + ": coordinates out of bounds");
    }
    s.events.push_back({static_cast<int>(x), static_cast<int>(y), t, p == 1 ? 1 : -1});
    max_x = std::max(max_x, static_cast<int>(x));
    max_y = std::max(max_y, static_cast<int>(y));
  }
  if (!size_known) {
    s.width = max_x + 1;
    s.height = max_y + 1;
  }
  sort_by_time(s);
  return s;
}

EventStream load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "EVT1", 4) != 0) fail(path + ": bad magic, expected EVT1");
  EventStream s;
  s.width = static_cast<int>(get_le<std::uint32_t>(in));
  s.height = static_cast<int>(get_le<std::uint32_t>(in));
  const std::uint64_t count = get_le<std::uint64_t>(in);
  s.events.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Event e;
    e.t = get_le<double>(in);
    const auto x = get_le<std::uint16_t>(in);
    const auto y = get_le<std::uint16_t>(in);
    const auto p = get_le<std::uint8_t>(in);
    get_le<std::uint8_t>(in);  // pad
    if (!in) fail(path + ": truncated at record " + std::to_string(i));
    if (x >= s.width || y >= s.height) {
      fail(path + ": record " + std::to_string(i) + " coordinates out of bounds");
    }
    e.x = x;
    e.y = y;
    e.p = (p == 1) ? 1 : -1;
    s.events.push_back(e);
  }
  sort_by_time(s);
  return s;
}

}  // namespace

EventStream load_events(const std::string& path, EventFormat format) {
  return format == EventFormat::kText ? load_text(path) : load_binary(path);
}

void write_events(const std::string& path, const EventStream& stream, EventFormat format) {
  if (format == EventFormat::kText) {
    std::ofstream out(path);
    if (!out) fail("cannot write " + path);
    out << "# size " << stream.width << " " << stream.height << "\n";
    out.precision(12);
    for (const Event& e : stream.events) {
      out << e.t << " " << e.x << " " << e.y << " " << (e.p > 0 ? 1 : 0) << "\n";
    }
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write " + path);
    out.write("EVT1", 4);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(stream.width));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(stream.height));
    put_le<std::uint64_t>(out, stream.events.size());
    for (const Event& e : stream.events) {
      put_le<double>(out, e.t);
      put_le<std::uint16_t>(out, static_cast<std::uint16_t>(e.x));
      put_le<std::uint16_t>(out, static_cast<std::uint16_t>(e.y));
      put_le<std::uint8_t>(out, e.p > 0 ? 1 : 0);
      put_le<std::uint8_t>(out, 0);
    }
  }
}

EventFrameGroups group_events(const EventStream& stream, int n_groups) {
  const std::int64_t k = static_cast<std::int64_t>(stream.count());
  if (n_groups < 1) fail("group_events: N must be >= 1");
  if (k < n_groups) fail("group_events: N exceeds event count");
  EventFrameGroups g;
  g.width = stream.width;
  g.height = stream.height;
  g.n_groups = n_groups;
  g.window_start = stream.t_start();
  g.window_end = stream.t_end();
  const size_t px = static_cast<size_t>(stream.width) * stream.height;
  g.pos.assign(static_cast<size_t>(n_groups), std::vector<double>(px, 0.0));
  g.neg.assign(static_cast<size_t>(n_groups), std::vector<double>(px, 0.0));
  for (int n = 0; n < n_groups; ++n) {
    const std::int64_t lo = k * n / n_groups;        // exclusive
    const std::int64_t hi = k * (n + 1) / n_groups;  // inclusive
    for (std::int64_t i = lo; i < hi; ++i) {
      const Event& e = stream.events[static_cast<size_t>(i)];
      const size_t idx = static_cast<size_t>(e.y) * stream.width + e.x;
      if (e.p > 0) {
        g.pos[static_cast<size_t>(n)][idx] += 1.0;
      } else {
        g.neg[static_cast<size_t>(n)][idx] += 1.0;
      }
    }
  }
  return g;
}

Tensor to_ann_input(const EventFrameGroups& groups) {
  const int n = groups.n_groups;
  const size_t px = static_cast<size_t>(groups.width) * groups.height;
  std::vector<double> data;
  data.reserve(2 * n * px);
  for (int i = 0; i < n; ++i) {
    data.insert(data.end(), groups.pos[static_cast<size_t>(i)].begin(),
                groups.pos[static_cast<size_t>(i)].end());
    data.insert(data.end(), groups.neg[static_cast<size_t>(i)].begin(),
                groups.neg[static_cast<size_t>(i)].end());
  }
  return Tensor::from_data({1, 2 * n, groups.height, groups.width}, std::move(data));
}

std::vector<Tensor> to_snn_input(const EventFrameGroups& groups) {
  std::vector<Tensor> out;
  out.reserve(static_cast<size_t>(groups.n_groups));
  for (int i = 0; i < groups.n_groups; ++i) {
    std::vector<double> data;
    data.reserve(2 * groups.pos[static_cast<size_t>(i)].size());
    data.insert(data.end(), groups.pos[static_cast<size_t>(i)].begin(),
                groups.pos[static_cast<size_t>(i)].end());
    data.insert(data.end(), groups.neg[static_cast<size_t>(i)].begin(),
                groups.neg[static_cast<size_t>(i)].end());
    out.push_back(Tensor::from_data({1, 2, groups.height, groups.width}, std::move(data)));
  }
  return out;
}

std::pair<EventStream, GroundTruthFlow> synth_translating_pattern(const SynthConfig& cfg) {
  if (cfg.density <= 0.0) fail("synth: density must be positive");
  if (cfg.width < 4 || cfg.height < 4) fail("synth: sensor too small");
  if (cfg.duration <= 0.0) fail("synth: duration must be positive");
  const double limit = std::min(cfg.width, cfg.height) / 4.0;
  if (std::abs(cfg.vx) > limit || std::abs(cfg.vy) > limit) {
    fail("synth: velocity exceeds min(W,H)/4");
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double speed = std::hypot(cfg.vx, cfg.vy);
  const int per_dot = std::max(4, static_cast<int>(std::ceil(2.0 * speed)));
  const std::int64_t target =
      static_cast<std::int64_t>(std::ceil(cfg.density * cfg.width * cfg.height));
  const std::int64_t n_dots = std::max<std::int64_t>(1, (target + per_dot - 1) / per_dot);

  // Spawn ranges keep the whole trajectory in frame.
  const double x_lo = std::max(0.0, -cfg.vx);
  const double x_hi = std::min<double>(cfg.width - 1, cfg.width - 1 - cfg.vx);
  const double y_lo = std::max(0.0, -cfg.vy);
  const double y_hi = std::min<double>(cfg.height - 1, cfg.height - 1 - cfg.vy);

  EventStream s;
  s.width = cfg.width;
  s.height = cfg.height;
  for (std::int64_t d = 0; d < n_dots; ++d) {
    const double x0 = x_lo + (x_hi - x_lo) * unit(rng);
    const double y0 = y_lo + (y_hi - y_lo) * unit(rng);
    const int pol = (d % 2 == 0) ? 1 : -1;
    for (int j = 0; j < per_dot; ++j) {
      // Jittered but strictly ordered timestamps along the trajectory.
      const double frac = (j + 0.25 + 0.5 * unit(rng)) / per_dot;
      const double t = frac * cfg.duration;
      // Subpixel dither before rounding: without it the rounding error is
      // correlated with t and washes out the contrast-loss landscape.
      const int ex = static_cast<int>(std::lround(x0 + cfg.vx * frac + unit(rng) - 0.5));
      const int ey = static_cast<int>(std::lround(y0 + cfg.vy * frac + unit(rng) - 0.5));
      if (ex < 0 || ex >= cfg.width || ey < 0 || ey >= cfg.height) continue;
      s.events.push_back({ex, ey, t, pol});
    }
  }
  std::stable_sort(s.events.begin(), s.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });

  GroundTruthFlow gt;
  gt.flow = FlowField(cfg.width, cfg.height);
  std::fill(gt.flow.u.begin(), gt.flow.u.end(), cfg.vx);
  std::fill(gt.flow.v.begin(), gt.flow.v.end(), cfg.vy);
  gt.valid_mask.assign(static_cast<size_t>(cfg.width) * cfg.height, 255);
  return {std::move(s), std::move(gt)};
}

}  // namespace stflow

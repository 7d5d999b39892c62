#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "core/events.hpp"

using namespace stflow;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

EventStream sample_stream() {
  EventStream s;
  s.width = 8;
  s.height = 6;
  s.events = {{1, 2, 0.00, 1}, {3, 4, 0.25, -1}, {0, 0, 0.50, 1},
              {7, 5, 0.75, -1}, {4, 1, 1.00, 1}};
  return s;
}

}  // namespace

TEST_CASE("group partition covers every event exactly once") {
  // Floor boundaries (K*n/N, K*(n+1)/N]; exhaustive over small K,N and spot
  // checks up to 1e4.
  auto check = [](std::int64_t k, int n_groups) {
    std::int64_t covered = 0;
    std::int64_t prev_hi = 0;
    for (int n = 0; n < n_groups; ++n) {
      const std::int64_t lo = k * n / n_groups;
      const std::int64_t hi = k * (n + 1) / n_groups;
      CHECK(lo == prev_hi);
      covered += hi - lo;
      prev_hi = hi;
    }
    CHECK(prev_hi == k);
    CHECK(covered == k);
  };
  for (std::int64_t k = 1; k <= 64; ++k) {
    for (int n = 1; n <= static_cast<int>(k); ++n) check(k, n);
  }
  check(10000, 10000);
  check(9999, 7);
  check(10000, 9973);
  check(4096, 3);
}

TEST_CASE("group_events counts match a direct slice loop") {
  EventStream s = sample_stream();
  const EventFrameGroups g = group_events(s, 2);
  REQUIRE(g.n_groups == 2);
  // first group: events [0,2), second: [2,5)
  CHECK(g.pos[0][2 * 8 + 1] == 1.0);
  CHECK(g.neg[0][4 * 8 + 3] == 1.0);
  CHECK(g.pos[1][0] == 1.0);
  CHECK(g.neg[1][5 * 8 + 7] == 1.0);
  CHECK(g.pos[1][1 * 8 + 4] == 1.0);
  double total = 0.0;
  for (int n = 0; n < 2; ++n) {
    for (double v : g.pos[static_cast<size_t>(n)]) total += v;
    for (double v : g.neg[static_cast<size_t>(n)]) total += v;
  }
  CHECK(total == doctest::Approx(5.0));
}

TEST_CASE("group_events rejects more groups than events") {
  EventStream s = sample_stream();
  CHECK_THROWS(group_events(s, 6));
}

TEST_CASE("text round trip preserves events and geometry") {
  const std::string path = tmp_path("stflow_events_rt.txt");
  const EventStream s = sample_stream();
  write_events(path, s, EventFormat::kText);
  const EventStream r = load_events(path, EventFormat::kText);
  REQUIRE(r.count() == s.count());
  CHECK(r.width == s.width);
  CHECK(r.height == s.height);
  for (size_t i = 0; i < s.count(); ++i) {
    CHECK(r.events[i].x == s.events[i].x);
    CHECK(r.events[i].y == s.events[i].y);
    CHECK(r.events[i].p == s.events[i].p);
    CHECK(r.events[i].t == doctest::Approx(s.events[i].t).epsilon(1e-12));
  }
  // save(load(file)) is byte-identical
  const std::string path2 = tmp_path("stflow_events_rt2.txt");
  write_events(path2, r, EventFormat::kText);
  CHECK(slurp(path) == slurp(path2));
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("binary round trip is bit-exact") {
  const std::string path = tmp_path("stflow_events_rt.bin");
  const EventStream s = sample_stream();
  write_events(path, s, EventFormat::kBinary);
  const EventStream r = load_events(path, EventFormat::kBinary);
  REQUIRE(r.count() == s.count());
  for (size_t i = 0; i < s.count(); ++i) {
    CHECK(r.events[i].t == s.events[i].t);  // f64 exact
    CHECK(r.events[i].x == s.events[i].x);
    CHECK(r.events[i].p == s.events[i].p);
  }
  const std::string path2 = tmp_path("stflow_events_rt2.bin");
  write_events(path2, r, EventFormat::kBinary);
  CHECK(slurp(path) == slurp(path2));
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("binary loader rejects bad magic") {
  const std::string path = tmp_path("stflow_events_bad.bin");
  std::ofstream(path, std::ios::binary) << "NOPE1234";
  CHECK_THROWS(load_events(path, EventFormat::kBinary));
  std::remove(path.c_str());
}

TEST_CASE("to_ann_input channel order f1+, f1-, ..., fN+, fN-") {
  const EventStream s = sample_stream();
  const EventFrameGroups g = group_events(s, 2);
  const Tensor t = to_ann_input(g);
  REQUIRE(t.shape() == Shape{1, 4, 6, 8});
  for (int n = 0; n < 2; ++n) {
    for (int y = 0; y < 6; ++y) {
      for (int x = 0; x < 8; ++x) {
        CHECK(t.at4(0, 2 * n, y, x) ==
              g.pos[static_cast<size_t>(n)][static_cast<size_t>(y) * 8 + x]);
        CHECK(t.at4(0, 2 * n + 1, y, x) ==
              g.neg[static_cast<size_t>(n)][static_cast<size_t>(y) * 8 + x]);
      }
    }
  }
  const auto snn = to_snn_input(g);
  REQUIRE(snn.size() == 2);
  for (int n = 0; n < 2; ++n) {
    REQUIRE(snn[static_cast<size_t>(n)].shape() == Shape{1, 2, 6, 8});
    for (int y = 0; y < 6; ++y) {
      for (int x = 0; x < 8; ++x) {
        CHECK(snn[static_cast<size_t>(n)].at4(0, 0, y, x) == t.at4(0, 2 * n, y, x));
        CHECK(snn[static_cast<size_t>(n)].at4(0, 1, y, x) == t.at4(0, 2 * n + 1, y, x));
      }
    }
  }
}

TEST_CASE("synthetic pattern: bounds, ordering, determinism, ground truth") {
  SynthConfig cfg;
  cfg.width = 32;
  cfg.height = 24;
  cfg.density = 0.8;
  cfg.vx = 3.0;
  cfg.vy = -2.0;
  cfg.seed = 7;
  auto [s, gt] = synth_translating_pattern(cfg);
  REQUIRE(s.count() > 0);
  double prev_t = -1.0;
  for (const Event& e : s.events) {
    CHECK(e.x >= 0);
    CHECK(e.x < cfg.width);
    CHECK(e.y >= 0);
    CHECK(e.y < cfg.height);
    CHECK(e.t >= prev_t);
    CHECK((e.p == 1 || e.p == -1));
    prev_t = e.t;
  }
  for (size_t i = 0; i < gt.flow.u.size(); ++i) {
    CHECK(gt.flow.u[i] == cfg.vx);
    CHECK(gt.flow.v[i] == cfg.vy);
    CHECK(gt.valid_mask[i] != 0);
  }
  auto [s2, gt2] = synth_translating_pattern(cfg);
  REQUIRE(s2.count() == s.count());
  for (size_t i = 0; i < s.count(); ++i) {
    CHECK(s2.events[i].x == s.events[i].x);
    CHECK(s2.events[i].t == s.events[i].t);
  }
}

TEST_CASE("synthetic pattern rejects out-of-range velocity") {
  SynthConfig cfg;
  cfg.width = 16;
  cfg.height = 16;
  cfg.vx = 5.0;  // limit is 4
  CHECK_THROWS(synth_translating_pattern(cfg));
}

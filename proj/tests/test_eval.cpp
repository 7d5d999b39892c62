#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "core/eval.hpp"

using namespace stflow;

namespace {

EventStream moving_scene(double vx = 3.0, double vy = 1.0, unsigned long long seed = 3) {
  SynthConfig sc;
  sc.width = 24;
  sc.height = 24;
  sc.density = 1.0;
  sc.vx = vx;
  sc.vy = vy;
  sc.seed = seed;
  return synth_translating_pattern(sc).first;
}

FlowField constant_flow(int w, int h, double u, double v) {
  FlowField f(w, h);
  std::fill(f.u.begin(), f.u.end(), u);
  std::fill(f.v.begin(), f.v.end(), v);
  return f;
}

GroundTruthFlow full_gt(int w, int h, double u, double v) {
  GroundTruthFlow gt;
  gt.flow = constant_flow(w, h, u, v);
  gt.valid_mask.assign(static_cast<size_t>(w) * h, 1);
  return gt;
}

double mass(const WarpedEventImage& img) {
  double acc = img.clipped_mass;
  for (double v : img.count_pos) acc += v;
  for (double v : img.count_neg) acc += v;
  return acc;
}

double count_variance(const WarpedEventImage& img) {
  const auto summed = img.count_sum();
  double mean = 0.0;
  for (double v : summed) mean += v;
  mean /= summed.size();
  double var = 0.0;
  for (double v : summed) var += (v - mean) * (v - mean);
  return var / summed.size();
}

}  // namespace

TEST_CASE("warp with zero flow reproduces the plain count image") {
  const EventStream s = moving_scene();
  const FlowField zero(24, 24);
  const WarpedEventImage img = warp_events(s, zero, s.t_end(), s.t_end() - s.t_start());
  std::vector<double> plain(24 * 24, 0.0);
  for (const Event& e : s.events) plain[static_cast<size_t>(e.y) * 24 + e.x] += 1.0;
  const auto summed = img.count_sum();
  for (size_t i = 0; i < plain.size(); ++i) {
    CHECK(summed[i] == doctest::Approx(plain[i]).epsilon(1e-12));
  }
  CHECK(img.clipped_mass == 0.0);
}

TEST_CASE("constant flow displaces start-time events by exactly the flow") {
  EventStream s;
  s.width = 16;
  s.height = 16;
  s.events = {{4, 5, 0.0, 1}, {9, 2, 0.0, -1}, {12, 12, 1.0, 1}};
  const FlowField f = constant_flow(16, 16, 2.0, 3.0);
  const WarpedEventImage img = warp_events(s, f, 1.0, 1.0);
  CHECK(img.count_pos[static_cast<size_t>(5 + 3) * 16 + (4 + 2)] == doctest::Approx(1.0));
  CHECK(img.count_neg[static_cast<size_t>(2 + 3) * 16 + (9 + 2)] == doctest::Approx(1.0));
  // the t_ref-time event stays put
  CHECK(img.count_pos[static_cast<size_t>(12) * 16 + 12] == doctest::Approx(1.0));
}

TEST_CASE("warp mass is conserved up to tracked clipping") {
  const EventStream s = moving_scene();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dist(-6.0, 6.0);
  FlowField f(24, 24);
  for (double& v : f.u) v = dist(rng);
  for (double& v : f.v) v = dist(rng);
  const WarpedEventImage img = warp_events(s, f, s.t_end(), s.t_end() - s.t_start());
  CHECK(mass(img) == doctest::Approx(static_cast<double>(s.count())).epsilon(1e-9));
}

TEST_CASE("warping by ground truth concentrates the event image") {
  const EventStream s = moving_scene();
  const double dt = s.t_end() - s.t_start();
  const FlowField gt = constant_flow(24, 24, 3.0, 1.0);
  const FlowField zero(24, 24);
  const WarpedEventImage sharp = warp_events(s, gt, s.t_end(), dt);
  const WarpedEventImage plain = warp_events(s, zero, s.t_end(), dt);
  // bilinear splatting spreads single events over corners, so pixel-support
  // counts are not a sharpness proxy; the count variance is
  CHECK(count_variance(sharp) > count_variance(plain));
}

TEST_CASE("warp rejects non-positive dt") {
  const EventStream s = moving_scene();
  CHECK_THROWS_AS(warp_events(s, FlowField(24, 24), 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("aee identities and Pythagorean case") {
  const GroundTruthFlow gt = full_gt(8, 8, 1.0, 2.0);
  const std::vector<std::uint8_t> all(64, 1);
  CHECK(*aee(gt.flow, gt, all) == doctest::Approx(0.0));
  const FlowField off = constant_flow(8, 8, 1.0 + 3.0, 2.0 + 4.0);
  CHECK(*aee(off, gt, all) == doctest::Approx(5.0));
}

TEST_CASE("aee with a random mask equals the direct masked loop") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  GroundTruthFlow gt = full_gt(8, 8, 0.0, 0.0);
  FlowField pred(8, 8);
  std::vector<std::uint8_t> mask(64);
  for (size_t i = 0; i < 64; ++i) {
    gt.flow.u[i] = dist(rng);
    gt.flow.v[i] = dist(rng);
    pred.u[i] = dist(rng);
    pred.v[i] = dist(rng);
    mask[i] = (rng() % 2) ? 1 : 0;
  }
  double acc = 0.0;
  int n = 0;
  for (size_t i = 0; i < 64; ++i) {
    if (!mask[i]) continue;
    acc += std::hypot(pred.u[i] - gt.flow.u[i], pred.v[i] - gt.flow.v[i]);
    ++n;
  }
  REQUIRE(n > 0);
  CHECK(*aee(pred, gt, mask) == doctest::Approx(acc / n).epsilon(1e-12));
}

TEST_CASE("aee is absent on an empty evaluation set") {
  const GroundTruthFlow gt = full_gt(4, 4, 0.0, 0.0);
  const std::vector<std::uint8_t> none(16, 0);
  CHECK(!aee(gt.flow, gt, none).has_value());
}

TEST_CASE("aee triangle bound over a shared mask") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  FlowField a(6, 6), b(6, 6), c(6, 6);
  for (size_t i = 0; i < a.u.size(); ++i) {
    a.u[i] = dist(rng); a.v[i] = dist(rng);
    b.u[i] = dist(rng); b.v[i] = dist(rng);
    c.u[i] = dist(rng); c.v[i] = dist(rng);
  }
  const std::vector<std::uint8_t> all(36, 1);
  GroundTruthFlow gb, gc;
  gb.flow = b; gb.valid_mask = all;
  gc.flow = c; gc.valid_mask = all;
  CHECK(*aee(a, gc, all) <= *aee(a, gb, all) + *aee(b, gc, all) + 1e-12);
}

TEST_CASE("aee_windows: perfect predictor and quarter composition") {
  const EventStream s = moving_scene();
  const GroundTruthFlow gt = full_gt(24, 24, 3.0, 1.0);
  auto perfect = [&gt](const EventStream&) { return gt.flow; };
  CHECK(*aee_windows(perfect, s, gt, AeeMode::kDt1) == doctest::Approx(0.0));
  auto quarter = [&gt](const EventStream&) {
    FlowField f = gt.flow;
    for (double& v : f.u) v *= 0.25;
    for (double& v : f.v) v *= 0.25;
    return f;
  };
  CHECK(*aee_windows(quarter, s, gt, AeeMode::kDt4) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("dt4 quartile boundaries match the 4-group event partition") {
  const EventStream s = moving_scene();
  const EventFrameGroups groups = group_events(s, 4);
  std::vector<size_t> seen_counts;
  auto probe = [&seen_counts, &s](const EventStream& part) {
    seen_counts.push_back(part.count());
    return FlowField(s.width, s.height);
  };
  const GroundTruthFlow gt = full_gt(24, 24, 3.0, 1.0);
  aee_windows(probe, s, gt, AeeMode::kDt4);
  REQUIRE(seen_counts.size() == 4);
  const std::int64_t k = static_cast<std::int64_t>(s.count());
  for (int q = 0; q < 4; ++q) {
    const std::int64_t expect = k * (q + 1) / 4 - k * q / 4;
    CHECK(seen_counts[static_cast<size_t>(q)] == static_cast<size_t>(expect));
    double group_mass = 0.0;
    for (double v : groups.pos[static_cast<size_t>(q)]) group_mass += v;
    for (double v : groups.neg[static_cast<size_t>(q)]) group_mass += v;
    CHECK(group_mass == doctest::Approx(static_cast<double>(expect)));
  }
}

TEST_CASE("fwl identities") {
  const EventStream s = moving_scene();
  const double dt = s.t_end() - s.t_start();
  CHECK(*fwl(s, FlowField(24, 24), dt) == doctest::Approx(1.0));
  CHECK(*fwl(s, constant_flow(24, 24, 3.0, 1.0), dt) > 1.0);
  // scattering flow (negated ground truth) defocuses
  CHECK(*fwl(s, constant_flow(24, 24, -3.0, -1.0), dt) < 1.0);
  EventStream empty;
  empty.width = 24;
  empty.height = 24;
  CHECK(!fwl(empty, FlowField(24, 24), 1.0).has_value());
}

TEST_CASE("rsat identities and shift invariance") {
  const EventStream s = moving_scene();
  CHECK(*rsat(s, FlowField(24, 24)) == doctest::Approx(1.0));
  CHECK(*rsat(s, constant_flow(24, 24, 3.0, 1.0)) < 1.0);
  EventStream shifted = s;
  for (Event& e : shifted.events) e.t += 5.0;
  CHECK(*rsat(shifted, constant_flow(24, 24, 3.0, 1.0)) ==
        doctest::Approx(*rsat(s, constant_flow(24, 24, 3.0, 1.0))).epsilon(1e-12));
}

TEST_CASE("metric report CSV rows") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "stflow_metrics.csv").string();
  MetricReport r;
  r.scenario = "synthetic";
  r.aee1 = 0.5;
  r.fwl = 1.2;
  write_metric_csv(path, {r});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "scenario,metric,value");
  std::getline(in, line);
  CHECK(line.substr(0, 15) == "synthetic,aee1,");
  std::getline(in, line);
  CHECK(line.substr(0, 14) == "synthetic,fwl,");
  CHECK(!std::getline(in, line));  // absent metrics emit no rows
  std::remove(path.c_str());
}

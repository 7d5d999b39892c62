#include "core/eval.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace stflow {

std::vector<double> WarpedEventImage::count_sum() const {
  std::vector<double> out(count_pos.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = count_pos[i] + count_neg[i];
  return out;
}

WarpedEventImage warp_events(const EventStream& events, const FlowField& flow,
                             double t_ref, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("warp_events: dt must be positive");
  if (flow.width != events.width || flow.height != events.height) {
    throw std::invalid_argument("warp_events: flow extents do not match sensor");
  }
  const int width = events.width, height = events.height;
  const size_t px = static_cast<size_t>(width) * height;
  WarpedEventImage img;
  img.width = width;
  img.height = height;
  img.t_ref = t_ref;
  img.dt = dt;
  img.count_pos.assign(px, 0.0);
  img.count_neg.assign(px, 0.0);
  std::vector<double> s_pos(px, 0.0), s_neg(px, 0.0);
  const double t0 = events.t_start();

  for (const Event& e : events.events) {
    const double alpha = (t_ref - e.t) / dt;
    const double t_norm = (e.t - t0) / dt;
    const double xs = e.x + alpha * flow.u_at(e.y, e.x);
    const double ys = e.y + alpha * flow.v_at(e.y, e.x);
    const int x0 = static_cast<int>(std::floor(xs));
    const int y0 = static_cast<int>(std::floor(ys));
    const double fx = xs - x0;
    const double fy = ys - y0;
    auto& cimg = (e.p > 0) ? img.count_pos : img.count_neg;
    auto& simg = (e.p > 0) ? s_pos : s_neg;
    const int cx[2] = {x0, x0 + 1};
    const int cy[2] = {y0, y0 + 1};
    const double wx[2] = {1.0 - fx, fx};
    const double wy[2] = {1.0 - fy, fy};
    for (int iy = 0; iy < 2; ++iy) {
      for (int ix = 0; ix < 2; ++ix) {
        const double w = wx[ix] * wy[iy];
        if (w == 0.0) continue;
        if (cx[ix] < 0 || cx[ix] >= width || cy[iy] < 0 || cy[iy] >= height) {
          img.clipped_mass += w;
          continue;
        }
        const size_t dst = static_cast<size_t>(cy[iy]) * width + cx[ix];
        cimg[dst] += w;
        simg[dst] += w * t_norm;
      }
    }
  }
  img.tavg_pos.assign(px, 0.0);
  img.tavg_neg.assign(px, 0.0);
  for (size_t i = 0; i < px; ++i) {
    if (img.count_pos[i] > 0.0) img.tavg_pos[i] = s_pos[i] / img.count_pos[i];
    if (img.count_neg[i] > 0.0) img.tavg_neg[i] = s_neg[i] / img.count_neg[i];
  }
  return img;
}

std::vector<std::uint8_t> event_count_mask(const EventStream& events) {
  std::vector<std::uint8_t> mask(static_cast<size_t>(events.width) * events.height, 0);
  for (const Event& e : events.events) {
    mask[static_cast<size_t>(e.y) * events.width + e.x] = 1;
  }
  return mask;
}

std::optional<double> aee(const FlowField& pred, const GroundTruthFlow& gt,
                          const std::vector<std::uint8_t>& event_mask) {
  if (pred.width != gt.flow.width || pred.height != gt.flow.height) {
    throw std::invalid_argument("aee: extent mismatch");
  }
  const size_t px = pred.u.size();
  if (gt.valid_mask.size() != px || event_mask.size() != px) {
    throw std::invalid_argument("aee: mask size mismatch");
  }
  double acc = 0.0;
  std::int64_t count = 0;
  for (size_t i = 0; i < px; ++i) {
    if (!gt.valid_mask[i] || !event_mask[i]) continue;
    const double du = pred.u[i] - gt.flow.u[i];
    const double dv = pred.v[i] - gt.flow.v[i];
    acc += std::sqrt(du * du + dv * dv);
    ++count;
  }
  if (count == 0) return std::nullopt;
  return acc / static_cast<double>(count);
}

std::optional<double> aee_windows(
    const std::function<FlowField(const EventStream&)>& pred_fn,
    const EventStream& events, const GroundTruthFlow& gt, AeeMode mode) {
  const auto mask = event_count_mask(events);
  if (mode == AeeMode::kDt1) {
    return aee(pred_fn(events), gt, mask);
  }
  const size_t k = events.count();
  if (k < 4) throw std::invalid_argument("aee_windows: need at least 4 events for dt4");
  FlowField total(events.width, events.height);
  for (int q = 0; q < 4; ++q) {
    // Same floor partition as the N-group event slicing.
    const size_t lo = k * static_cast<size_t>(q) / 4;
    const size_t hi = k * static_cast<size_t>(q + 1) / 4;
    EventStream part;
    part.width = events.width;
    part.height = events.height;
    part.events.assign(events.events.begin() + static_cast<std::ptrdiff_t>(lo),
                       events.events.begin() + static_cast<std::ptrdiff_t>(hi));
    const FlowField f = pred_fn(part);
    for (size_t i = 0; i < total.u.size(); ++i) {
      total.u[i] += f.u[i];
      total.v[i] += f.v[i];
    }
  }
  return aee(total, gt, mask);
}

namespace {

double population_variance(const std::vector<double>& img) {
  double mean = 0.0;
  for (double v : img) mean += v;
  mean /= static_cast<double>(img.size());
  double acc = 0.0;
  for (double v : img) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(img.size());
}

}  // namespace

std::optional<double> fwl(const EventStream& events, const FlowField& flow, double dt) {
  if (events.events.empty()) return std::nullopt;
  const FlowField zero(events.width, events.height);
  const double t_end = events.t_end();
  const double var_warped = population_variance(warp_events(events, flow, t_end, dt).count_sum());
  const double var_plain = population_variance(warp_events(events, zero, t_end, dt).count_sum());
  if (var_plain == 0.0) return std::nullopt;
  return var_warped / var_plain;
}

std::optional<double> rsat(const EventStream& events, const FlowField& flow,
                           const LossConfig& cfg) {
  if (events.events.empty()) return std::nullopt;
  const double t0 = events.t_start(), t1 = events.t_end();
  if (t1 <= t0) return std::nullopt;
  const FlowField zero(events.width, events.height);
  const double base = contrast_loss(zero, events, t0, t1, cfg);
  if (base == 0.0) return std::nullopt;
  return contrast_loss(flow, events, t0, t1, cfg) / base;
}

namespace {

void emit_metric(std::ofstream& out, const std::string& scenario, const char* name,
                 const std::optional<double>& v) {
  if (v) out << scenario << "," << name << "," << *v << "\n";
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

}  // namespace

void write_metric_csv(const std::string& path, const std::vector<MetricReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(12);
  out << "scenario,metric,value\n";
  for (const auto& r : reports) {
    emit_metric(out, r.scenario, "aee1", r.aee1);
    emit_metric(out, r.scenario, "aee4", r.aee4);
    emit_metric(out, r.scenario, "fwl", r.fwl);
    emit_metric(out, r.scenario, "rsat", r.rsat);
  }
}

void print_metric_table(std::ostream& out, const std::vector<MetricReport>& reports) {
  out << std::left << std::setw(20) << "scenario" << std::right << std::setw(10) << "AEE1"
      << std::setw(10) << "AEE4" << std::setw(10) << "FWL" << std::setw(10) << "RSAT"
      << "\n";
  for (const auto& r : reports) {
    out << std::left << std::setw(20) << r.scenario << std::right << std::setw(10)
        << cell(r.aee1) << std::setw(10) << cell(r.aee4) << std::setw(10) << cell(r.fwl)
        << std::setw(10) << cell(r.rsat) << "\n";
  }
}

}  // namespace stflow

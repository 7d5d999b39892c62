#include "core/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace stflow {

namespace {

struct SplatImages {
  std::vector<double> w_pos, s_pos, w_neg, s_neg;
  double active_pixels = 0.0;
};

// Mass/timestamp splat of flow-warped events for one reference time.
SplatImages splat_reference(const std::vector<double>& flow_u,
                            const std::vector<double>& flow_v, int width, int height,
                            const std::vector<Event>& events, double t_start, double dt,
                            double t_ref) {
  SplatImages img;
  const size_t px = static_cast<size_t>(width) * height;
  img.w_pos.assign(px, 0.0);
  img.s_pos.assign(px, 0.0);
  img.w_neg.assign(px, 0.0);
  img.s_neg.assign(px, 0.0);
  for (const Event& e : events) {
    const size_t src = static_cast<size_t>(e.y) * width + e.x;
    const double alpha = (t_ref - e.t) / dt;
    // Timestamps centered on the window midpoint: a motion-compensated
    // pixel averages the whole window and scores ~0, while an uncompensated
    // one keeps its time-of-crossing offset. Measured from the window edge
    // the compensated average is 0.5, which buries the signal under a
    // constant.
    const double t_norm = (e.t - t_start) / dt - 0.5;
    const double xs = e.x + alpha * flow_u[src];
    const double ys = e.y + alpha * flow_v[src];
    const int x0 = static_cast<int>(std::floor(xs));
    const int y0 = static_cast<int>(std::floor(ys));
    const double fx = xs - x0;
    const double fy = ys - y0;
    auto& wimg = (e.p > 0) ? img.w_pos : img.w_neg;
    auto& simg = (e.p > 0) ? img.s_pos : img.s_neg;
    const int cx[2] = {x0, x0 + 1};
    const int cy[2] = {y0, y0 + 1};
    const double wx[2] = {1.0 - fx, fx};
    const double wy[2] = {1.0 - fy, fy};
    for (int iy = 0; iy < 2; ++iy) {
      if (cy[iy] < 0 || cy[iy] >= height) continue;
      for (int ix = 0; ix < 2; ++ix) {
        if (cx[ix] < 0 || cx[ix] >= width) continue;
        const double w = wx[ix] * wy[iy];
        if (w == 0.0) continue;
        const size_t dst = static_cast<size_t>(cy[iy]) * width + cx[ix];
        wimg[dst] += w;
        simg[dst] += w * t_norm;
      }
    }
  }
  for (size_t i = 0; i < px; ++i) {
    if (img.w_pos[i] > 0.0 || img.w_neg[i] > 0.0) img.active_pixels += 1.0;
  }
  return img;
}

double reference_loss(const SplatImages& img, double eps_w) {
  double acc = 0.0;
  for (size_t i = 0; i < img.w_pos.size(); ++i) {
    const double tp = img.s_pos[i] / (img.w_pos[i] + eps_w);
    const double tn = img.s_neg[i] / (img.w_neg[i] + eps_w);
    acc += tp * tp + tn * tn;
  }
  return acc / (img.active_pixels + eps_w);
}

}  // namespace

Tensor contrast_loss_op(const Tensor& flow, const EventStream& events, double t_start,
                        double t_end, const LossConfig& cfg) {
  const Shape& s = flow.shape();
  if (s.size() != 4 || s[0] != 1 || s[1] != 2) {
    throw std::invalid_argument("contrast_loss: expected flow [1,2,H,W], got " +
                                shape_str(s));
  }
  const int height = s[2], width = s[3];
  if (events.width != width || events.height != height) {
    throw std::invalid_argument("contrast_loss: flow extents do not match sensor");
  }
  if (events.events.empty()) return Tensor::scalar(0.0);
  const double dt = t_end - t_start;
  if (dt <= 0.0) throw std::invalid_argument("contrast_loss: empty window");

  const size_t px = static_cast<size_t>(width) * height;
  std::vector<double> flow_u(flow.data().begin(),
                             flow.data().begin() + static_cast<std::ptrdiff_t>(px));
  std::vector<double> flow_v(flow.data().begin() + static_cast<std::ptrdiff_t>(px),
                             flow.data().end());

  const double refs[2] = {t_start, t_end};
  std::vector<SplatImages> imgs;
  double loss = 0.0;
  for (double t_ref : refs) {
    imgs.push_back(splat_reference(flow_u, flow_v, width, height, events.events, t_start,
                                   dt, t_ref));
    loss += reference_loss(imgs.back(), cfg.eps_w);
  }

  auto backward = [imgs = std::move(imgs), evs = events.events, t_start, dt, width,
                   height, eps_w = cfg.eps_w, refs0 = refs[0],
                   refs1 = refs[1]](TensorNode& n) {
    if (!n.parents[0].requires_grad()) return;
    auto& g = n.parents[0].grad();
    const size_t px2 = static_cast<size_t>(width) * height;
    const double upstream = n.grad[0];
    const std::vector<double>& fu = n.parents[0].data();
    const double refs2[2] = {refs0, refs1};
    for (int r = 0; r < 2; ++r) {
      const SplatImages& img = imgs[static_cast<size_t>(r)];
      const double norm = img.active_pixels + eps_w;
      for (const Event& e : evs) {
        const size_t src = static_cast<size_t>(e.y) * width + e.x;
        const double alpha = (refs2[r] - e.t) / dt;
        const double t_norm = (e.t - t_start) / dt - 0.5;  // midpoint-centered
        const double xs = e.x + alpha * fu[src];
        const double ys = e.y + alpha * fu[px2 + src];
        const int x0 = static_cast<int>(std::floor(xs));
        const int y0 = static_cast<int>(std::floor(ys));
        const double fx = xs - x0;
        const double fy = ys - y0;
        const auto& wimg = (e.p > 0) ? img.w_pos : img.w_neg;
        const auto& simg = (e.p > 0) ? img.s_pos : img.s_neg;
        const int cx[2] = {x0, x0 + 1};
        const int cy[2] = {y0, y0 + 1};
        const double wx[2] = {1.0 - fx, fx};
        const double wy[2] = {1.0 - fy, fy};
        const double dwx[2] = {-1.0, 1.0};
        const double dwy[2] = {-1.0, 1.0};
        double dl_dxs = 0.0, dl_dys = 0.0;
        for (int iy = 0; iy < 2; ++iy) {
          if (cy[iy] < 0 || cy[iy] >= height) continue;
          for (int ix = 0; ix < 2; ++ix) {
            if (cx[ix] < 0 || cx[ix] >= width) continue;
            const size_t dst = static_cast<size_t>(cy[iy]) * width + cx[ix];
            const double denom = wimg[dst] + eps_w;
            const double t_avg = simg[dst] / denom;
            const double g_w = 2.0 * t_avg * (t_norm - t_avg) / (denom * norm);
            dl_dxs += g_w * dwx[ix] * wy[iy];
            dl_dys += g_w * wx[ix] * dwy[iy];
          }
        }
        g[src] += upstream * dl_dxs * alpha;
        g[px2 + src] += upstream * dl_dys * alpha;
      }
    }
  };

  return make_op({1}, {loss}, {flow}, std::move(backward));
}

Tensor smoothness_loss_op(const Tensor& flow, const LossConfig& cfg) {
  const Shape& s = flow.shape();
  if (s.size() != 4 || s[0] != 1 || s[1] != 2) {
    throw std::invalid_argument("smoothness_loss: expected flow [1,2,H,W]");
  }
  const int height = s[2], width = s[3];
  const size_t px = static_cast<size_t>(width) * height;
  const std::int64_t pairs = 2LL * (static_cast<std::int64_t>(height) * (width - 1) +
                                    static_cast<std::int64_t>(height - 1) * width);
  const double eps2 = cfg.charb_eps * cfg.charb_eps;
  const double alpha = cfg.charb_alpha;

  const auto& d = flow.data();
  double acc = 0.0;
  auto term = [&](double diff) { return std::pow(diff * diff + eps2, alpha); };
  for (int c = 0; c < 2; ++c) {
    const double* plane = d.data() + static_cast<size_t>(c) * px;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x + 1 < width; ++x) acc += term(plane[y * width + x + 1] - plane[y * width + x]);
    }
    for (int y = 0; y + 1 < height; ++y) {
      for (int x = 0; x < width; ++x) acc += term(plane[(y + 1) * width + x] - plane[y * width + x]);
    }
  }
  const double loss = acc / static_cast<double>(pairs);

  return make_op({1}, {loss}, {flow}, [width, height, px, pairs, eps2, alpha](TensorNode& n) {
    if (!n.parents[0].requires_grad()) return;
    auto& g = n.parents[0].grad();
    const auto& d2 = n.parents[0].data();
    const double scale_g = n.grad[0] / static_cast<double>(pairs);
    auto accumulate = [&](size_t hi, size_t lo, double* gp, const double* plane) {
      const double diff = plane[hi] - plane[lo];
      const double dterm = alpha * std::pow(diff * diff + eps2, alpha - 1.0) * 2.0 * diff;
      gp[hi] += scale_g * dterm;
      gp[lo] -= scale_g * dterm;
    };
    for (int c = 0; c < 2; ++c) {
      const double* plane = d2.data() + static_cast<size_t>(c) * px;
      double* gp = g.data() + static_cast<size_t>(c) * px;
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x + 1 < width; ++x) {
          accumulate(static_cast<size_t>(y) * width + x + 1,
                     static_cast<size_t>(y) * width + x, gp, plane);
        }
      }
      for (int y = 0; y + 1 < height; ++y) {
        for (int x = 0; x < width; ++x) {
          accumulate(static_cast<size_t>(y + 1) * width + x,
                     static_cast<size_t>(y) * width + x, gp, plane);
        }
      }
    }
  });
}

Tensor total_loss_op(const Tensor& flow, const EventStream& events, double t_start,
                     double t_end, const LossConfig& cfg) {
  const Tensor contrast = contrast_loss_op(flow, events, t_start, t_end, cfg);
  const Tensor smooth = smoothness_loss_op(flow, cfg);
  return add(contrast, scale(smooth, cfg.lambda_smooth));
}

double contrast_loss(const FlowField& flow, const EventStream& events, double t_start,
                     double t_end, const LossConfig& cfg) {
  return contrast_loss_op(flow_to_tensor(flow), events, t_start, t_end, cfg).item();
}

double smoothness_loss(const FlowField& flow, const LossConfig& cfg) {
  return smoothness_loss_op(flow_to_tensor(flow), cfg).item();
}

double total_loss(const FlowField& flow, const EventStream& events, const LossConfig& cfg) {
  if (events.events.empty()) return smoothness_loss(flow, cfg) * cfg.lambda_smooth;
  return total_loss_op(flow_to_tensor(flow), events, events.t_start(), events.t_end(), cfg)
      .item();
}

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, double lr, double beta1,
                             double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (lr_ < 0.0) throw std::invalid_argument("adam: lr must be non-negative");
  for (auto& p : params_) {
    m_.emplace_back(p.data().size(), 0.0);
    v_.emplace_back(p.data().size(), 0.0);
  }
}

void AdamOptimizer::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void AdamOptimizer::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k].data();
    const auto& g = params_[k].grad();
    if (g.size() != p.size()) throw std::invalid_argument("adam: grad shape mismatch");
    for (size_t i = 0; i < p.size(); ++i) {
      m_[k][i] = beta1_ * m_[k][i] + (1.0 - beta1_) * g[i];
      v_[k][i] = beta2_ * v_[k][i] + (1.0 - beta2_) * g[i] * g[i];
      const double mhat = m_[k][i] / bc1;
      const double vhat = v_[k][i] / bc2;
      p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void write_loss_csv(const std::string& path, const std::vector<LossRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iter,epoch,contrast,smooth,total,lr\n";
  out.precision(12);
  for (const auto& r : rows) {
    out << r.iter << "," << r.epoch << "," << r.contrast << "," << r.smooth << ","
        << r.total << "," << r.lr << "\n";
  }
}

namespace {

void validate_dataset(const Dataset& dataset, int n_groups) {
  if (dataset.empty()) throw std::invalid_argument("training: empty dataset");
  for (const auto& s : dataset) {
    if (static_cast<int>(s.events.count()) < n_groups) {
      throw std::invalid_argument("training: sample with fewer events than groups");
    }
  }
}

void clamp_lambdas(StFlowNetParams& params) {
  params.for_each_param([](const std::string& name, Tensor& t) {
    if (name.find("lambda") != std::string::npos) {
      t.data()[0] = std::max(t.data()[0], 1e-4);
    }
  });
}

std::vector<Tensor> weight_params(StFlowNetParams& params) {
  std::vector<Tensor> out;
  params.for_each_param([&out](const std::string& name, Tensor& t) {
    if (name.find("lambda") == std::string::npos) out.push_back(t);
  });
  return out;
}

// Shared epoch/batch loop; forward_fn maps a sample to its loss terms.
template <typename ForwardFn>
std::vector<LossRow> run_training(const Dataset& dataset, const TrainConfig& cfg,
                                  AdamOptimizer& opt, int epochs, ForwardFn&& forward_fn,
                                  const std::function<void()>& post_step) {
  std::vector<LossRow> history;
  double lr = cfg.lr;
  int iter = 0;
  bool done = false;
  for (int epoch = 0; epoch < epochs && !done; ++epoch) {
    std::vector<size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed + static_cast<unsigned long long>(epoch) * 1000003ULL);
    std::shuffle(order.begin(), order.end(), rng);
    opt.set_lr(lr);
    for (size_t start = 0; start < order.size() && !done; start += static_cast<size_t>(cfg.batch_size)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      opt.zero_grad();
      double sum_contrast = 0.0, sum_smooth = 0.0, sum_total = 0.0;
      {
        Tape tape;
        Tensor batch_loss;
        for (size_t i = start; i < stop; ++i) {
          auto [contrast, smooth, total] = forward_fn(dataset[order[i]]);
          sum_contrast += contrast.item();
          sum_smooth += smooth.item();
          sum_total += total.item();
          batch_loss = batch_loss.defined() ? add(batch_loss, total) : total;
        }
        batch_loss = scale(batch_loss, 1.0 / static_cast<double>(stop - start));
        tape.backward(batch_loss);
      }
      opt.step();
      if (post_step) post_step();
      const double count = static_cast<double>(stop - start);
      ++iter;
      history.push_back({iter, epoch, sum_contrast / count, sum_smooth / count,
                         sum_total / count, lr});
      if (cfg.max_iters > 0 && iter >= cfg.max_iters) done = true;
    }
    lr *= cfg.lr_gamma;
  }
  return history;
}

}  // namespace

std::vector<LossRow> train_ann(StFlowNetParams& params, const Dataset& dataset,
                               const TrainConfig& cfg, const LossConfig& loss_cfg) {
  validate_dataset(dataset, params.cfg.n_groups);
  AdamOptimizer opt(params.parameters(), cfg.lr);
  auto forward_fn = [&](const TrainSample& sample) {
    const EventFrameGroups groups = group_events(sample.events, params.cfg.n_groups);
    ModelState st;
    const Tensor flow = forward_ann(params, to_ann_input(groups), st);
    const Tensor contrast = contrast_loss_op(flow, sample.events, sample.events.t_start(),
                                             sample.events.t_end(), loss_cfg);
    const Tensor smooth = smoothness_loss_op(flow, loss_cfg);
    const Tensor total = add(contrast, scale(smooth, loss_cfg.lambda_smooth));
    return std::make_tuple(contrast, smooth, total);
  };
  return run_training(dataset, cfg, opt, cfg.epochs_ann, forward_fn,
                      [&params]() { clamp_lambdas(params); });
}

namespace {

SpikingModel stbp_loop(SpikingModel model, const Dataset& dataset, const TrainConfig& cfg,
                       const LossConfig& loss_cfg, int epochs,
                       std::vector<LossRow>* history) {
  validate_dataset(dataset, model.params.cfg.n_groups);
  if (epochs <= 0) {
    if (history) history->clear();
    return model;
  }
  AdamOptimizer opt(weight_params(model.params), cfg.lr);
  auto forward_fn = [&](const TrainSample& sample) {
    const EventFrameGroups groups = group_events(sample.events, model.params.cfg.n_groups);
    const SpikingRun run = forward_snn(model, to_snn_input(groups));
    const Tensor contrast = contrast_loss_op(run.flow, sample.events,
                                             sample.events.t_start(),
                                             sample.events.t_end(), loss_cfg);
    const Tensor smooth = smoothness_loss_op(run.flow, loss_cfg);
    const Tensor total = add(contrast, scale(smooth, loss_cfg.lambda_smooth));
    return std::make_tuple(contrast, smooth, total);
  };
  auto rows = run_training(dataset, cfg, opt, epochs, forward_fn, nullptr);
  if (history) *history = std::move(rows);
  return model;
}

}  // namespace

SpikingModel bisnn_train(const StFlowNetParams& ann, const Dataset& dataset,
                         const TrainConfig& cfg, double tau_generator,
                         double tau_convgru2, const LossConfig& loss_cfg,
                         std::vector<LossRow>* history) {
  SpikingModel model = convert_a2s(ann, ann.cfg.n_groups, tau_generator, tau_convgru2);
  return stbp_loop(std::move(model), dataset, cfg, loss_cfg, cfg.epochs_bisnn, history);
}

SpikingModel direct_stbp_train(const NetworkConfig& net_cfg, const Dataset& dataset,
                               const TrainConfig& cfg, double tau_generator,
                               double tau_convgru2, const LossConfig& loss_cfg,
                               std::vector<LossRow>* history) {
  const StFlowNetParams fresh = StFlowNetParams::init(net_cfg, cfg.seed);
  SpikingModel model = convert_a2s(fresh, net_cfg.n_groups, tau_generator, tau_convgru2);
  return stbp_loop(std::move(model), dataset, cfg, loss_cfg, cfg.epochs_bisnn, history);
}

}  // namespace stflow

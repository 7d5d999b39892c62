#include "core/pipeline.hpp"

#include <fstream>
#include <stdexcept>

namespace stflow {

Dataset make_synth_dataset(const RunConfig& cfg) {
  Dataset out;
  SynthConfig sc = synth_config(cfg);
  for (int i = 0; i < cfg.samples; ++i) {
    sc.seed = cfg.seed + static_cast<unsigned long long>(i);
    out.push_back({synth_translating_pattern(sc).first});
  }
  return out;
}

FlowField infer_ann(const StFlowNetParams& params, const EventStream& events) {
  const EventFrameGroups groups = group_events(events, params.cfg.n_groups);
  ModelState st;
  return tensor_to_flow(forward_ann(params, to_ann_input(groups), st));
}

FlowField infer_snn(const SpikingModel& model, const EventStream& events,
                    SnnDiagnostics* diag) {
  const EventFrameGroups groups = group_events(events, model.params.cfg.n_groups);
  SpikingRun run = forward_snn(model, to_snn_input(groups));
  if (diag) *diag = run.diag;
  return tensor_to_flow(run.flow);
}

FlowField infer_checkpoint(const std::string& ckpt_path, const EventStream& events) {
  if (peek_kind(ckpt_path) == ModelKind::kAnn) {
    return infer_ann(load_ann(ckpt_path), events);
  }
  return infer_snn(load_snn(ckpt_path), events);
}

MetricReport evaluate_checkpoint(const std::string& ckpt_path, const EventStream& events,
                                 const GroundTruthFlow& gt, const std::string& scenario) {
  auto pred_fn = [&ckpt_path](const EventStream& ev) {
    return infer_checkpoint(ckpt_path, ev);
  };
  MetricReport r;
  r.scenario = scenario;
  r.aee1 = aee_windows(pred_fn, events, gt, AeeMode::kDt1);
  if (events.count() >= 4) r.aee4 = aee_windows(pred_fn, events, gt, AeeMode::kDt4);
  const FlowField pred = pred_fn(events);
  const double dt = events.t_end() - events.t_start();
  if (dt > 0.0) r.fwl = fwl(events, pred, dt);
  r.rsat = rsat(events, pred);
  return r;
}

std::vector<SweepCell> sweep_taus(const StFlowNetParams& ann, const Dataset& train_data,
                                  const EventStream& eval_events,
                                  const GroundTruthFlow& gt, const RunConfig& cfg,
                                  int retrain_epochs) {
  if (cfg.grid < 1) throw std::invalid_argument("sweep: grid must be >= 1");
  const auto mask = event_count_mask(eval_events);
  std::vector<SweepCell> cells;
  for (int i = 0; i < cfg.grid; ++i) {
    for (int j = 0; j < cfg.grid; ++j) {
      SweepCell cell;
      cell.tau0 = cfg.grid == 1 ? 0.0 : cfg.tau_max * i / (cfg.grid - 1);
      cell.tau1 = cfg.grid == 1 ? 0.0 : cfg.tau_max * j / (cfg.grid - 1);
      SpikingModel model;
      if (retrain_epochs > 0) {
        TrainConfig tc = train_config(cfg);
        tc.epochs_bisnn = retrain_epochs;
        model = bisnn_train(ann, train_data, tc, cell.tau0, cell.tau1, loss_config(cfg));
      } else {
        model = convert_a2s(ann, effective_time_window(cfg), cell.tau0, cell.tau1);
      }
      const FlowField pred = infer_snn(model, eval_events);
      cell.metrics.scenario = "tau0=" + std::to_string(cell.tau0) +
                              ",tau1=" + std::to_string(cell.tau1);
      cell.metrics.aee1 = aee(pred, gt, mask);
      const double dt = eval_events.t_end() - eval_events.t_start();
      if (dt > 0.0) cell.metrics.fwl = fwl(eval_events, pred, dt);
      cell.metrics.rsat = rsat(eval_events, pred);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& cells) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(12);
  out << "tau0,tau1,aee,fwl,rsat\n";
  auto cell_str = [](const std::optional<double>& v) {
    return v ? std::to_string(*v) : std::string();
  };
  for (const auto& c : cells) {
    out << c.tau0 << "," << c.tau1 << "," << cell_str(c.metrics.aee1) << ","
        << cell_str(c.metrics.fwl) << "," << cell_str(c.metrics.rsat) << "\n";
  }
}

}  // namespace stflow

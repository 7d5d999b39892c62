#include "stflownet.h"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/energy.hpp"
#include "core/eval.hpp"
#include "core/events.hpp"
#include "core/flow_io.hpp"
#include "core/pipeline.hpp"

using namespace stflow;

struct stfn_config {
  RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return 0;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return 1;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 2;
  }
}

const RunConfig& cfg_of(const stfn_config* c) {
  if (!c) throw std::invalid_argument("null config handle");
  return c->cfg;
}

std::string req(const char* s, const char* what) {
  if (!s || !*s) throw std::invalid_argument(std::string("missing argument: ") + what);
  return s;
}

EventStream load_events_any(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw std::runtime_error("cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  probe.read(magic, 4);
  const bool binary = probe.gcount() == 4 && magic[0] == 'E' && magic[1] == 'V' &&
                      magic[2] == 'T' && magic[3] == '1';
  probe.close();
  return load_events(path, binary ? EventFormat::kBinary : EventFormat::kText);
}

Dataset dataset_for(const RunConfig& cfg, const char* events_path) {
  if (events_path && *events_path) {
    Dataset d;
    d.push_back({load_events_any(events_path)});
    return d;
  }
  return make_synth_dataset(cfg);
}

GroundTruthFlow load_gt(const char* gt_flo, const char* gt_mask) {
  GroundTruthFlow gt;
  gt.flow = read_flo(req(gt_flo, "ground-truth flow"));
  if (gt_mask && *gt_mask) {
    int w = 0, h = 0;
    gt.valid_mask = read_mask_pgm(gt_mask, &w, &h);
    if (w != gt.flow.width || h != gt.flow.height) {
      throw std::runtime_error("ground-truth mask extents do not match flow");
    }
  } else {
    gt.valid_mask.assign(static_cast<size_t>(gt.flow.width) * gt.flow.height, 1);
  }
  return gt;
}

}  // namespace

extern "C" {

stfn_config* stfn_config_new(void) { return new stfn_config(); }

void stfn_config_free(stfn_config* cfg) { delete cfg; }

int stfn_config_set(stfn_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    if (!cfg) throw std::invalid_argument("null config handle");
    set_config_key(cfg->cfg, req(key, "key"), req(value, "value"));
  });
}

int stfn_config_load_file(stfn_config* cfg, const char* path) {
  return guarded([&] {
    if (!cfg) throw std::invalid_argument("null config handle");
    load_config_file(cfg->cfg, req(path, "config path"));
  });
}

const char* stfn_config_keys(void) {
  static const std::string listing = [] {
    std::ostringstream out;
    for (const auto& k : config_schema()) {
      out << k.key << "=" << k.def << "  " << k.doc << "\n";
    }
    return out.str();
  }();
  return listing.c_str();
}

const char* stfn_last_error(void) { return g_last_error.c_str(); }

int stfn_synth(const stfn_config* cfg, const char* out_events, const char* format,
               const char* out_flo, const char* out_mask) {
  return guarded([&] {
    const RunConfig& rc = cfg_of(cfg);
    const std::string fmt = format ? format : "text";
    EventFormat ef;
    if (fmt == "text") {
      ef = EventFormat::kText;
    } else if (fmt == "binary") {
      ef = EventFormat::kBinary;
    } else {
      throw std::invalid_argument("format must be text or binary");
    }
    auto [events, gt] = synth_translating_pattern(synth_config(rc));
    write_events(req(out_events, "event output path"), events, ef);
    if (out_flo && *out_flo) write_flo(out_flo, gt.flow);
    if (out_mask && *out_mask) {
      write_mask_pgm(out_mask, gt.flow.width, gt.flow.height, gt.valid_mask);
    }
  });
}

int stfn_train(const stfn_config* cfg, const char* events_path, const char* out_ckpt,
               const char* out_loss_csv) {
  return guarded([&] {
    const RunConfig& rc = cfg_of(cfg);
    const Dataset data = dataset_for(rc, events_path);
    StFlowNetParams params = StFlowNetParams::init(network_config(rc), rc.seed);
    const auto history = train_ann(params, data, train_config(rc), loss_config(rc));
    save_ann(req(out_ckpt, "checkpoint output"), params, data[0].events.height,
             data[0].events.width);
    if (out_loss_csv && *out_loss_csv) write_loss_csv(out_loss_csv, history);
  });
}

int stfn_convert(const stfn_config* cfg, const char* ann_ckpt, const char* out_ckpt) {
  return guarded([&] {
    const RunConfig& rc = cfg_of(cfg);
    int h = 0, w = 0;
    const StFlowNetParams ann = load_ann(req(ann_ckpt, "analog checkpoint"), &h, &w);
    SpikingModel m = convert_a2s(ann, effective_time_window(rc), rc.tau0, rc.tau1);
    m.reset = rc.reset == "hard" ? ResetMode::kHard : ResetMode::kSoft;
    save_snn(req(out_ckpt, "checkpoint output"), m, h, w);
  });
}

int stfn_retrain(const stfn_config* cfg, const char* ann_ckpt, const char* events_path,
                 const char* out_ckpt, const char* out_loss_csv) {
  return guarded([&] {
    const RunConfig& rc = cfg_of(cfg);
    int h = 0, w = 0;
    const StFlowNetParams ann = load_ann(req(ann_ckpt, "analog checkpoint"), &h, &w);
    const Dataset data = dataset_for(rc, events_path);
    std::vector<LossRow> history;
    SpikingModel m = bisnn_train(ann, data, train_config(rc), rc.tau0, rc.tau1,
                                 loss_config(rc), &history);
    save_snn(req(out_ckpt, "checkpoint output"), m, data[0].events.height,
             data[0].events.width);
    if (out_loss_csv && *out_loss_csv) write_loss_csv(out_loss_csv, history);
  });
}

int stfn_stbp(const stfn_config* cfg, const char* events_path, const char* out_ckpt,
              const char* out_loss_csv) {
  return guarded([&] {
    const RunConfig& rc = cfg_of(cfg);
    const Dataset data = dataset_for(rc, events_path);
    std::vector<LossRow> history;
    SpikingModel m = direct_stbp_train(network_config(rc), data, train_config(rc),
                                       rc.tau0, rc.tau1, loss_config(rc), &history);
    save_snn(req(out_ckpt, "checkpoint output"), m, data[0].events.height,
             data[0].events.width);
    if (out_loss_csv && *out_loss_csv) write_loss_csv(out_loss_csv, history);
  });
}

int stfn_infer(const stfn_config* cfg, const char* ckpt, const char* events_path,
               const char* out_flo, const char* out_ppm) {
  return guarded([&] {
    cfg_of(cfg);
    const EventStream events = load_events_any(req(events_path, "event file"));
    const FlowField flow = infer_checkpoint(req(ckpt, "checkpoint"), events);
    write_flo(req(out_flo, "flow output"), flow);
    if (out_ppm && *out_ppm) write_ppm(out_ppm, render_flow(flow));
  });
}

int stfn_eval(const stfn_config* cfg, const char* ckpt, const char* events_path,
              const char* gt_flo, const char* gt_mask, const char* out_csv) {
  return guarded([&] {
    cfg_of(cfg);
    const EventStream events = load_events_any(req(events_path, "event file"));
    const std::string ckpt_path = req(ckpt, "checkpoint");
    MetricReport report;
    if (gt_flo && *gt_flo) {
      report = evaluate_checkpoint(ckpt_path, events, load_gt(gt_flo, gt_mask), "eval");
    } else {
      report.scenario = "eval";
      const FlowField pred = infer_checkpoint(ckpt_path, events);
      const double dt = events.t_end() - events.t_start();
      if (dt > 0.0) report.fwl = fwl(events, pred, dt);
      report.rsat = rsat(events, pred);
    }
    write_metric_csv(req(out_csv, "metric output"), {report});
  });
}

int stfn_energy(const stfn_config* cfg, const char* ckpt, const char* events_path,
                const char* out_csv) {
  return guarded([&] {
    const RunConfig& rc = cfg_of(cfg);
    const EventStream events = load_events_any(req(events_path, "event file"));
    const std::string path = req(ckpt, "checkpoint");
    SpikingModel model = peek_kind(path) == ModelKind::kSnn
                             ? load_snn(path)
                             : convert_a2s(load_ann(path), effective_time_window(rc),
                                           rc.tau0, rc.tau1);
    SnnDiagnostics diag;
    infer_snn(model, events, &diag);
    const EnergyConstants ec = energy_constants(rc);
    const OpCountReport ann_report =
        count_ann_ops(model.params, events.height, events.width, ec);
    const OpCountReport snn_report =
        count_snn_ops(model, firing_report(diag), events.height, events.width, ec);
    write_energy_csv(req(out_csv, "energy output"), ann_report, snn_report);
  });
}

int stfn_sweep(const stfn_config* cfg, const char* ann_ckpt, const char* events_path,
               const char* gt_flo, const char* gt_mask, const char* out_csv) {
  return guarded([&] {
    const RunConfig& rc = cfg_of(cfg);
    const StFlowNetParams ann = load_ann(req(ann_ckpt, "analog checkpoint"));
    const EventStream events = load_events_any(req(events_path, "event file"));
    const GroundTruthFlow gt = load_gt(gt_flo, gt_mask);
    const auto cells = sweep_taus(ann, {}, events, gt, rc, 0);
    write_sweep_csv(req(out_csv, "sweep output"), cells);
  });
}

int stfn_visualize(const stfn_config* cfg, const char* flo_path, const char* out_ppm) {
  return guarded([&] {
    cfg_of(cfg);
    const FlowField flow = read_flo(req(flo_path, "flow file"));
    write_ppm(req(out_ppm, "image output"), render_flow(flow));
  });
}

}  // extern "C"

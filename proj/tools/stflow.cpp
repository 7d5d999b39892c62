// Command-line front end; talks to the pipeline exclusively through the C
// API in stflownet.h.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stflownet.h"

namespace {

struct ConfigArgs {
  std::string config_file;
  std::vector<std::string> sets;  // key=value
  std::vector<std::pair<std::string, std::string>> direct;  // from shortcut flags
};

void add_common(CLI::App* sub, ConfigArgs& args) {
  sub->add_option("--config", args.config_file, "flat key=value config file");
  sub->add_option("--set", args.sets, "override one config key (key=value), repeatable");
}

// Builds the handle; returns nullptr after printing the failure.
stfn_config* build_config(const ConfigArgs& args) {
  stfn_config* cfg = stfn_config_new();
  auto fail = [&cfg](int rc) {
    std::fprintf(stderr, "error: %s\n", stfn_last_error());
    stfn_config_free(cfg);
    cfg = nullptr;
    return rc;
  };
  if (!args.config_file.empty() && stfn_config_load_file(cfg, args.config_file.c_str())) {
    fail(1);
    return nullptr;
  }
  for (const auto& kv : args.sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      stfn_config_free(cfg);
      return nullptr;
    }
    if (stfn_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str())) {
      fail(1);
      return nullptr;
    }
  }
  for (const auto& [k, v] : args.direct) {
    if (stfn_config_set(cfg, k.c_str(), v.c_str())) {
      fail(1);
      return nullptr;
    }
  }
  return cfg;
}

int finish(stfn_config* cfg, int rc) {
  if (rc != 0) std::fprintf(stderr, "error: %s\n", stfn_last_error());
  stfn_config_free(cfg);
  return rc;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-camera optical flow: analog training, spiking conversion and "
               "retraining, inference, metrics, energy accounting"};
  app.require_subcommand(1);
  app.footer(std::string("Config keys (key=default  description):\n") + stfn_config_keys());

  ConfigArgs args;
  int exit_code = 0;

  // synth
  {
    auto* sub = app.add_subcommand("synth", "generate a synthetic translating scene");
    add_common(sub, args);
    auto size = std::make_shared<int>(0);
    auto velocity = std::make_shared<std::string>();
    auto seed = std::make_shared<std::string>();
    auto density = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("text");
    auto gt_flo = std::make_shared<std::string>();
    auto gt_mask = std::make_shared<std::string>();
    sub->add_option("--size", *size, "square sensor extent");
    sub->add_option("--velocity", *velocity, "flow as vx,vy pixels per window");
    sub->add_option("--seed", *seed, "RNG seed");
    sub->add_option("--density", *density, "events per pixel");
    sub->add_option("--out", *out, "event output path")->required();
    sub->add_option("--format", *format, "text|binary");
    sub->add_option("--gt-flo", *gt_flo, "ground-truth flow output (.flo)");
    sub->add_option("--gt-mask", *gt_mask, "ground-truth validity mask output (PGM)");
    sub->callback([&, size, velocity, seed, density, out, format, gt_flo, gt_mask] {
      if (*size > 0) {
        args.direct.emplace_back("width", std::to_string(*size));
        args.direct.emplace_back("height", std::to_string(*size));
      }
      if (!velocity->empty()) {
        const size_t comma = velocity->find(',');
        if (comma == std::string::npos) {
          std::fprintf(stderr, "error: --velocity expects vx,vy\n");
          exit_code = 1;
          return;
        }
        args.direct.emplace_back("vx", velocity->substr(0, comma));
        args.direct.emplace_back("vy", velocity->substr(comma + 1));
      }
      if (!seed->empty()) args.direct.emplace_back("seed", *seed);
      if (!density->empty()) args.direct.emplace_back("density", *density);
      stfn_config* cfg = build_config(args);
      if (!cfg) {
        exit_code = 1;
        return;
      }
      exit_code = finish(cfg, stfn_synth(cfg, out->c_str(), format->c_str(),
                                         opt(*gt_flo), opt(*gt_mask)));
    });
  }

  // train
  {
    auto* sub = app.add_subcommand("train", "train the analog network");
    add_common(sub, args);
    auto events = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto loss_csv = std::make_shared<std::string>();
    auto epochs = std::make_shared<std::string>();
    auto seed = std::make_shared<std::string>();
    sub->add_option("--events", *events, "event file (default: synthetic data)");
    sub->add_option("--out", *out, "checkpoint output")->required();
    sub->add_option("--loss-csv", *loss_csv, "per-iteration loss log");
    sub->add_option("--epochs", *epochs, "training epochs");
    sub->add_option("--seed", *seed, "RNG seed");
    sub->callback([&, events, out, loss_csv, epochs, seed] {
      if (!epochs->empty()) args.direct.emplace_back("epochs", *epochs);
      if (!seed->empty()) args.direct.emplace_back("seed", *seed);
      stfn_config* cfg = build_config(args);
      if (!cfg) {
        exit_code = 1;
        return;
      }
      exit_code = finish(cfg, stfn_train(cfg, opt(*events), out->c_str(), opt(*loss_csv)));
    });
  }

  // convert
  {
    auto* sub = app.add_subcommand("convert", "threshold-transfer conversion to spiking");
    add_common(sub, args);
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto t = std::make_shared<std::string>();
    auto tau0 = std::make_shared<std::string>();
    auto tau1 = std::make_shared<std::string>();
    sub->add_option("--in", *in, "analog checkpoint")->required();
    sub->add_option("--out", *out, "spiking checkpoint output")->required();
    sub->add_option("--T", *t, "time window");
    sub->add_option("--tau0", *tau0, "generator decay constant");
    sub->add_option("--tau1", *tau1, "output state decay constant");
    sub->callback([&, in, out, t, tau0, tau1] {
      if (!t->empty()) args.direct.emplace_back("T", *t);
      if (!tau0->empty()) args.direct.emplace_back("tau0", *tau0);
      if (!tau1->empty()) args.direct.emplace_back("tau1", *tau1);
      stfn_config* cfg = build_config(args);
      if (!cfg) {
        exit_code = 1;
        return;
      }
      exit_code = finish(cfg, stfn_convert(cfg, in->c_str(), out->c_str()));
    });
  }

  // retrain
  {
    auto* sub = app.add_subcommand("retrain", "convert then retrain with surrogate gradients");
    add_common(sub, args);
    auto in = std::make_shared<std::string>();
    auto events = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto loss_csv = std::make_shared<std::string>();
    auto epochs = std::make_shared<std::string>();
    auto tau0 = std::make_shared<std::string>();
    auto tau1 = std::make_shared<std::string>();
    sub->add_option("--in", *in, "analog checkpoint")->required();
    sub->add_option("--events", *events, "event file (default: synthetic data)");
    sub->add_option("--out", *out, "spiking checkpoint output")->required();
    sub->add_option("--loss-csv", *loss_csv, "per-iteration loss log");
    sub->add_option("--epochs", *epochs, "retraining epochs");
    sub->add_option("--tau0", *tau0, "generator decay constant");
    sub->add_option("--tau1", *tau1, "output state decay constant");
    sub->callback([&, in, events, out, loss_csv, epochs, tau0, tau1] {
      if (!epochs->empty()) args.direct.emplace_back("epochs_bisnn", *epochs);
      if (!tau0->empty()) args.direct.emplace_back("tau0", *tau0);
      if (!tau1->empty()) args.direct.emplace_back("tau1", *tau1);
      stfn_config* cfg = build_config(args);
      if (!cfg) {
        exit_code = 1;
        return;
      }
      exit_code = finish(cfg, stfn_retrain(cfg, in->c_str(), opt(*events), out->c_str(),
                                           opt(*loss_csv)));
    });
  }

  // stbp
  {
    auto* sub = app.add_subcommand("stbp", "surrogate-gradient training from scratch");
    add_common(sub, args);
    auto events = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto loss_csv = std::make_shared<std::string>();
    auto epochs = std::make_shared<std::string>();
    sub->add_option("--events", *events, "event file (default: synthetic data)");
    sub->add_option("--out", *out, "spiking checkpoint output")->required();
    sub->add_option("--loss-csv", *loss_csv, "per-iteration loss log");
    sub->add_option("--epochs", *epochs, "training epochs");
    sub->callback([&, events, out, loss_csv, epochs] {
      if (!epochs->empty()) args.direct.emplace_back("epochs_bisnn", *epochs);
      stfn_config* cfg = build_config(args);
      if (!cfg) {
        exit_code = 1;
        return;
      }
      exit_code = finish(cfg, stfn_stbp(cfg, opt(*events), out->c_str(), opt(*loss_csv)));
    });
  }

  // infer
  {
    auto* sub = app.add_subcommand("infer", "predict flow for an event file");
    add_common(sub, args);
    auto ckpt = std::make_shared<std::string>();
    auto events = std::make_shared<std::string>();
    auto out_flo = std::make_shared<std::string>();
    auto out_ppm = std::make_shared<std::string>();
    sub->add_option("--ckpt", *ckpt, "checkpoint (analog or spiking)")->required();
    sub->add_option("--events", *events, "event file")->required();
    sub->add_option("--out-flo", *out_flo, "flow output (.flo)")->required();
    sub->add_option("--out-ppm", *out_ppm, "color-coded flow image");
    sub->callback([&, ckpt, events, out_flo, out_ppm] {
      stfn_config* cfg = build_config(args);
      if (!cfg) {
        exit_code = 1;
        return;
      }
      exit_code = finish(cfg, stfn_infer(cfg, ckpt->c_str(), events->c_str(),
                                         out_flo->c_str(), opt(*out_ppm)));
    });
  }

  // eval
  {
    auto* sub = app.add_subcommand("eval", "flow-quality metrics");
    add_common(sub, args);
    auto ckpt = std::make_shared<std::string>();
    auto events = std::make_shared<std::string>();
    auto gt_flo = std::make_shared<std::string>();
    auto gt_mask = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    sub->add_option("--ckpt", *ckpt, "checkpoint (analog or spiking)")->required();
    sub->add_option("--events", *events, "event file")->required();
    sub->add_option("--gt-flo", *gt_flo, "ground-truth flow (.flo)");
    sub->add_option("--gt-mask", *gt_mask, "ground-truth validity mask (PGM)");
    sub->add_option("--out", *out, "metric CSV output")->required();
    sub->callback([&, ckpt, events, gt_flo, gt_mask, out] {
      stfn_config* cfg = build_config(args);
      if (!cfg) {
        exit_code = 1;
        return;
      }
      exit_code = finish(cfg, stfn_eval(cfg, ckpt->c_str(), events->c_str(),
                                        opt(*gt_flo), opt(*gt_mask), out->c_str()));
    });
  }

  // energy
  {
    auto* sub = app.add_subcommand("energy", "operation-count energy report");
    add_common(sub, args);
    auto ckpt = std::make_shared<std::string>();
    auto events = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    sub->add_option("--ckpt", *ckpt, "checkpoint (analog checkpoints are converted)")
        ->required();
    sub->add_option("--events", *events, "representative event file")->required();
    sub->add_option("--out", *out, "energy CSV output")->required();
    sub->callback([&, ckpt, events, out] {
      stfn_config* cfg = build_config(args);
      if (!cfg) {
        exit_code = 1;
        return;
      }
      exit_code =
          finish(cfg, stfn_energy(cfg, ckpt->c_str(), events->c_str(), out->c_str()));
    });
  }

  // sweep
  {
    auto* sub = app.add_subcommand("sweep", "tau0 x tau1 conversion grid evaluation");
    add_common(sub, args);
    auto ckpt = std::make_shared<std::string>();
    auto events = std::make_shared<std::string>();
    auto gt_flo = std::make_shared<std::string>();
    auto gt_mask = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto grid = std::make_shared<std::string>();
    sub->add_option("--ckpt", *ckpt, "analog checkpoint")->required();
    sub->add_option("--events", *events, "event file")->required();
    sub->add_option("--gt-flo", *gt_flo, "ground-truth flow (.flo)")->required();
    sub->add_option("--gt-mask", *gt_mask, "ground-truth validity mask (PGM)");
    sub->add_option("--out", *out, "sweep CSV output")->required();
    sub->add_option("--grid", *grid, "grid edge length");
    sub->callback([&, ckpt, events, gt_flo, gt_mask, out, grid] {
      if (!grid->empty()) args.direct.emplace_back("grid", *grid);
      stfn_config* cfg = build_config(args);
      if (!cfg) {
        exit_code = 1;
        return;
      }
      exit_code = finish(cfg, stfn_sweep(cfg, ckpt->c_str(), events->c_str(),
                                         gt_flo->c_str(), opt(*gt_mask), out->c_str()));
    });
  }

  // visualize
  {
    auto* sub = app.add_subcommand("visualize", "render a .flo file as a PPM image");
    add_common(sub, args);
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    sub->add_option("--in", *in, "flow file (.flo)")->required();
    sub->add_option("--out", *out, "PPM output")->required();
    sub->callback([&, in, out] {
      stfn_config* cfg = build_config(args);
      if (!cfg) {
        exit_code = 1;
        return;
      }
      exit_code = finish(cfg, stfn_visualize(cfg, in->c_str(), out->c_str()));
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  return exit_code;
}

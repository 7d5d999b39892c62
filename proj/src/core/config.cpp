#include "core/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace stflow {

namespace {

struct KeyEntry {
  std::string doc;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

int parse_int(const std::string& v) {
  size_t pos = 0;
  const int out = std::stoi(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("not an integer: " + v);
  return out;
}

double parse_double(const std::string& v) {
  size_t pos = 0;
  const double out = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("not a number: " + v);
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw std::invalid_argument("not a boolean: " + v);
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

const std::map<std::string, KeyEntry>& registry() {
  static const std::map<std::string, KeyEntry> reg = [] {
    std::map<std::string, KeyEntry> r;
    auto add_int = [&r](const std::string& k, int RunConfig::*field, const std::string& doc) {
      r[k] = {doc, [field](const RunConfig& c) { return std::to_string(c.*field); },
              [field](RunConfig& c, const std::string& v) { c.*field = parse_int(v); }};
    };
    auto add_dbl = [&r](const std::string& k, double RunConfig::*field, const std::string& doc) {
      r[k] = {doc, [field](const RunConfig& c) { return fmt(c.*field); },
              [field](RunConfig& c, const std::string& v) { c.*field = parse_double(v); }};
    };
    add_int("base_channels", &RunConfig::base_channels, "encoder width scale");
    add_int("groups", &RunConfig::groups, "temporal event groups N");
    add_int("decoders", &RunConfig::decoders, "decoder conv count");
    add_int("levels", &RunConfig::levels, "QCFS quantization levels L");
    r["shifted"] = {"use the half-step-shifted QCFS form",
                    [](const RunConfig& c) { return c.shifted ? "1" : "0"; },
                    [](RunConfig& c, const std::string& v) { c.shifted = parse_bool(v); }};
    add_int("T", &RunConfig::time_window, "spiking time window (0 = groups)");
    add_dbl("tau0", &RunConfig::tau0, "generator membrane decay constant");
    add_dbl("tau1", &RunConfig::tau1, "output state decay constant");
    r["reset"] = {"membrane reset mode, soft|hard",
                  [](const RunConfig& c) { return c.reset; },
                  [](RunConfig& c, const std::string& v) {
                    if (v != "soft" && v != "hard") {
                      throw std::invalid_argument("reset must be soft or hard");
                    }
                    c.reset = v;
                  }};
    add_int("epochs", &RunConfig::epochs, "ANN training epochs");
    add_int("epochs_bisnn", &RunConfig::epochs_bisnn, "spiking retraining epochs");
    add_int("batch", &RunConfig::batch, "batch size");
    add_dbl("lr", &RunConfig::lr, "Adam learning rate");
    add_dbl("lr_gamma", &RunConfig::lr_gamma, "per-epoch learning-rate decay");
    add_int("max_iters", &RunConfig::max_iters, "hard iteration cap (0 = none)");
    add_dbl("lambda_smooth", &RunConfig::lambda_smooth, "smoothness loss weight");
    add_dbl("charb_eps", &RunConfig::charb_eps, "Charbonnier epsilon");
    r["seed"] = {"RNG seed",
                 [](const RunConfig& c) { return std::to_string(c.seed); },
                 [](RunConfig& c, const std::string& v) { c.seed = std::stoull(v); }};
    add_int("width", &RunConfig::width, "synthetic sensor width");
    add_int("height", &RunConfig::height, "synthetic sensor height");
    add_dbl("density", &RunConfig::density, "synthetic events per pixel");
    add_dbl("vx", &RunConfig::vx, "synthetic flow x, pixels per window");
    add_dbl("vy", &RunConfig::vy, "synthetic flow y, pixels per window");
    add_dbl("duration", &RunConfig::duration, "synthetic window length, seconds");
    add_int("samples", &RunConfig::samples, "synthetic dataset size");
    add_dbl("e_mac", &RunConfig::e_mac, "energy per MAC, joules");
    add_dbl("e_ac", &RunConfig::e_ac, "energy per AC, joules");
    add_int("grid", &RunConfig::grid, "sweep grid edge length");
    add_dbl("tau_max", &RunConfig::tau_max, "sweep upper bound for tau0/tau1");
    return r;
  }();
  return reg;
}

}  // namespace

std::vector<ConfigKeyDoc> config_schema() {
  const RunConfig defaults;
  std::vector<ConfigKeyDoc> out;
  for (const auto& [key, entry] : registry()) {
    out.push_back({key, entry.get(defaults), entry.doc});
  }
  return out;
}

void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto it = registry().find(key);
  if (it == registry().end()) {
    throw std::invalid_argument("unknown config key: " + key);
  }
  try {
    it->second.set(cfg, value);
  } catch (const std::exception& e) {
    throw std::invalid_argument("bad value for " + key + ": " + e.what());
  }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    size_t b = line.find_last_not_of(" \t\r");
    line = line.substr(a, b - a + 1);
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key=value");
    }
    auto trim = [](std::string s) {
      const size_t x = s.find_first_not_of(" \t");
      const size_t y = s.find_last_not_of(" \t");
      return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
    };
    set_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

NetworkConfig network_config(const RunConfig& cfg) {
  NetworkConfig n;
  n.base_channels = cfg.base_channels;
  n.n_groups = cfg.groups;
  n.num_decoders = cfg.decoders;
  n.qcfs_levels = cfg.levels;
  n.qcfs_shifted = cfg.shifted;
  return n;
}

TrainConfig train_config(const RunConfig& cfg) {
  TrainConfig t;
  t.epochs_ann = cfg.epochs;
  t.epochs_bisnn = cfg.epochs_bisnn;
  t.batch_size = cfg.batch;
  t.lr = cfg.lr;
  t.lr_gamma = cfg.lr_gamma;
  t.seed = cfg.seed;
  t.max_iters = cfg.max_iters;
  return t;
}

LossConfig loss_config(const RunConfig& cfg) {
  LossConfig l;
  l.lambda_smooth = cfg.lambda_smooth;
  l.charb_eps = cfg.charb_eps;
  return l;
}

SynthConfig synth_config(const RunConfig& cfg) {
  SynthConfig s;
  s.width = cfg.width;
  s.height = cfg.height;
  s.density = cfg.density;
  s.vx = cfg.vx;
  s.vy = cfg.vy;
  s.duration = cfg.duration;
  s.seed = cfg.seed;
  return s;
}

EnergyConstants energy_constants(const RunConfig& cfg) {
  EnergyConstants e;
  e.e_mac = cfg.e_mac;
  e.e_ac = cfg.e_ac;
  return e;
}

int effective_time_window(const RunConfig& cfg) {
  return cfg.time_window > 0 ? cfg.time_window : cfg.groups;
}

}  // namespace stflow

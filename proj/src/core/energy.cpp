#include "core/energy.hpp"

#include <fstream>
#include <stdexcept>

namespace stflow {

namespace {

struct ConvGeom {
  std::string name;
  double ops;         // Cout*H'*W'*Cin*9
  std::string spike_input_site;  // empty = analog input
};

double conv_ops(int cout, int cin, int out_h, int out_w) {
  return static_cast<double>(cout) * cin * 9.0 * out_h * out_w;
}

// Layer table shared by both reports; spike_input_site names which firing
// site feeds the layer when running spiking.
std::vector<ConvGeom> layer_table(const NetworkConfig& cfg, int height, int width) {
  const int c = cfg.base_channels;
  const int in_ch = 2 * cfg.n_groups;
  const int h2 = height / 2, w2 = width / 2;
  const int h4 = height / 4, w4 = width / 4;
  const int h8 = height / 8, w8 = width / 8;
  const int h16 = height / 16, w16 = width / 16;
  const int fused = 15 * c;

  std::vector<ConvGeom> t;
  for (const char* g : {"xi_r", "xi_z", "xi_i"}) {
    t.push_back({std::string("convgru1.") + g, conv_ops(in_ch, 2 * in_ch, height, width), ""});
  }
  t.push_back({"encoder1", conv_ops(c, in_ch, h2, w2), ""});
  t.push_back({"encoder2", conv_ops(2 * c, c, h4, w4), "encoder1"});
  t.push_back({"encoder3", conv_ops(4 * c, 2 * c, h8, w8), "encoder2"});
  t.push_back({"encoder4", conv_ops(8 * c, 4 * c, h16, w16), "encoder3"});
  t.push_back({"block1.conv1", conv_ops(8 * c, 8 * c, h16, w16), "encoder4"});
  t.push_back({"block1.conv2", conv_ops(8 * c, 8 * c, h16, w16), "block1.theta1"});
  t.push_back({"block2.conv1", conv_ops(8 * c, 8 * c, h16, w16), "block1.theta2"});
  t.push_back({"block2.conv2", conv_ops(8 * c, 8 * c, h16, w16), "block2.theta1"});
  t.push_back({"down8", conv_ops(c, c, h16, w16), "encoder1"});
  t.push_back({"down4", conv_ops(2 * c, 2 * c, h16, w16), "encoder2"});
  t.push_back({"down2", conv_ops(4 * c, 4 * c, h16, w16), "encoder3"});
  for (int i = 1; i <= cfg.num_decoders; ++i) {
    // decoder1 reads the upsampled fusion (real-valued); later decoders read
    // the previous decoder's spikes.
    const std::string site = (i == 1) ? "" : "decoder" + std::to_string(i - 1);
    t.push_back({"decoder" + std::to_string(i), conv_ops(fused, fused, h8, w8), site});
  }
  t.push_back({"generator", conv_ops(2, fused, h8, w8),
               "decoder" + std::to_string(cfg.num_decoders)});
  for (const char* g : {"xi_r", "xi_z", "xi_i"}) {
    t.push_back({std::string("convgru2.") + g, conv_ops(2, 4, height, width), ""});
  }
  return t;
}

bool forced_mac(const std::string& name) {
  return name.rfind("convgru1.", 0) == 0 || name.rfind("convgru2.", 0) == 0 ||
         name == "encoder1" || name == "decoder1";
}

double activation_ops(const NetworkConfig& cfg, int height, int width) {
  const int c = cfg.base_channels;
  const int in_ch = 2 * cfg.n_groups;
  const double px = static_cast<double>(height) * width;
  double acc = 3.0 * in_ch * px;  // convgru1 gates
  acc += 3.0 * 2.0 * px;          // convgru2 gates
  acc += c * px / 4 + 2 * c * px / 16 + 4 * c * px / 64 + 8 * c * px / 256;  // encoders
  acc += 4.0 * 8 * c * px / 256;              // residual activations
  acc += cfg.num_decoders * 15.0 * c * px / 64;  // decoders
  return acc;
}

void validate_extents(int height, int width) {
  if (height % 16 != 0 || width % 16 != 0 || height <= 0 || width <= 0) {
    throw std::invalid_argument("energy: extents must be positive and divisible by 16");
  }
}

}  // namespace

OpCountReport count_ann_ops(const StFlowNetParams& params, int height, int width,
                            const EnergyConstants& c) {
  validate_extents(height, width);
  OpCountReport r;
  r.time_window = 1;
  for (const ConvGeom& g : layer_table(params.cfg, height, width)) {
    LayerCount lc;
    lc.name = g.name;
    lc.kind = "MAC";
    lc.ops = g.ops;
    lc.rate = 1.0;
    lc.energy_j = g.ops * c.e_mac;
    lc.rationale = "dense real-valued input, full multiply-accumulate";
    r.total_energy_j += lc.energy_j;
    r.layers.push_back(std::move(lc));
  }
  r.activation_ops = activation_ops(params.cfg, height, width);
  return r;
}

OpCountReport count_snn_ops(const SpikingModel& model,
                            const std::map<std::string, double>& firing, int height,
                            int width, const EnergyConstants& c) {
  validate_extents(height, width);
  const int steps = model.params.cfg.n_groups * model.inner_repeats;
  OpCountReport r;
  r.time_window = steps;
  for (const ConvGeom& g : layer_table(model.params.cfg, height, width)) {
    LayerCount lc;
    lc.name = g.name;
    lc.ops = g.ops;
    if (forced_mac(g.name) || g.spike_input_site.empty()) {
      lc.kind = "MAC";
      lc.rate = 1.0;
      lc.energy_j = g.ops * steps * c.e_mac;
      lc.rationale = forced_mac(g.name)
                         ? "analog module (gating / first encoder / first decoder)"
                         : "real-valued input";
    } else {
      auto it = firing.find(g.spike_input_site);
      if (it == firing.end()) {
        throw std::invalid_argument("count_snn_ops: no firing data for site " +
                                    g.spike_input_site);
      }
      lc.kind = "AC";
      lc.rate = it->second;
      lc.energy_j = g.ops * lc.rate * steps * c.e_ac;
      lc.rationale = "binary spike input from " + g.spike_input_site;
    }
    r.total_energy_j += lc.energy_j;
    r.layers.push_back(std::move(lc));
  }
  r.activation_ops = activation_ops(model.params.cfg, height, width) * steps;
  return r;
}

double rec(const OpCountReport& ann, const OpCountReport& snn) {
  if (ann.total_energy_j <= 0.0) throw std::invalid_argument("rec: Phi_ANN must be positive");
  return snn.total_energy_j / ann.total_energy_j;
}

double rec_per_step(const OpCountReport& ann, const OpCountReport& snn) {
  if (ann.total_energy_j <= 0.0) throw std::invalid_argument("rec: Phi_ANN must be positive");
  return snn.per_step_energy_j() / ann.total_energy_j;
}

void write_energy_csv(const std::string& path, const OpCountReport& ann,
                      const OpCountReport& snn) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(12);
  out << "layer,kind,ops,rate,energy_j\n";
  for (const auto& l : ann.layers) {
    out << "ann." << l.name << "," << l.kind << "," << l.ops << "," << l.rate << ","
        << l.energy_j << "\n";
  }
  for (const auto& l : snn.layers) {
    out << "snn." << l.name << "," << l.kind << "," << l.ops << "," << l.rate << ","
        << l.energy_j << "\n";
  }
  out << "summary.phi_ann,TOTAL,,," << ann.total_energy_j << "\n";
  out << "summary.phi_snn,TOTAL,,," << snn.total_energy_j << "\n";
  out << "summary.phi_snn_per_step,TOTAL,,," << snn.per_step_energy_j() << "\n";
  out << "summary.eta,RATIO,,," << rec(ann, snn) << "\n";
  out << "summary.eta_per_step,RATIO,,," << rec_per_step(ann, snn) << "\n";
}

}  // namespace stflow

#include "core/checkpoint.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <vector>

namespace stflow {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'F', 'W'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_tensor(std::ostream& out, const std::string& name, const Shape& shape,
                const std::vector<double>& data) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(out, static_cast<std::uint32_t>(shape.size()));
  for (int d : shape) put_u32(out, static_cast<std::uint32_t>(d));
  for (double v : data) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
  }
}

void put_scalar(std::ostream& out, const std::string& name, double v) {
  put_tensor(out, name, {1}, {v});
}

struct Entry {
  Shape shape;
  std::vector<double> data;
};

struct FileContent {
  NetworkConfig cfg;
  int height = 0, width = 0;
  std::map<std::string, Entry> tensors;
};

FileContent read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  if (get_u32(in) != kVersion) throw std::runtime_error("checkpoint: unsupported version");

  FileContent fc;
  fc.cfg.base_channels = static_cast<int>(get_u32(in));
  fc.cfg.n_groups = static_cast<int>(get_u32(in));
  fc.cfg.num_decoders = static_cast<int>(get_u32(in));
  fc.cfg.qcfs_levels = static_cast<int>(get_u32(in));
  fc.height = static_cast<int>(get_u32(in));
  fc.width = static_cast<int>(get_u32(in));

  while (true) {
    in.peek();
    if (in.eof()) break;
    const std::uint32_t name_len = get_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const std::uint32_t ndim = get_u32(in);
    Entry e;
    std::int64_t count = 1;
    for (std::uint32_t i = 0; i < ndim; ++i) {
      const int d = static_cast<int>(get_u32(in));
      e.shape.push_back(d);
      count *= d;
    }
    e.data.resize(static_cast<size_t>(count));
    for (auto& v : e.data) {
      const std::uint32_t bits = get_u32(in);
      float f;
      std::memcpy(&f, &bits, 4);
      v = static_cast<double>(f);
    }
    fc.tensors.emplace(std::move(name), std::move(e));
  }
  if (fc.tensors.count("meta.shifted")) {
    fc.cfg.qcfs_shifted = fc.tensors.at("meta.shifted").data[0] != 0.0;
  }
  return fc;
}

std::ofstream open_out(const std::string& path, const NetworkConfig& cfg, int height,
                       int width) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(cfg.base_channels));
  put_u32(out, static_cast<std::uint32_t>(cfg.n_groups));
  put_u32(out, static_cast<std::uint32_t>(cfg.num_decoders));
  put_u32(out, static_cast<std::uint32_t>(cfg.qcfs_levels));
  put_u32(out, static_cast<std::uint32_t>(height));
  put_u32(out, static_cast<std::uint32_t>(width));
  return out;
}

void put_params(std::ofstream& out, const StFlowNetParams& params) {
  params.for_each_param([&out](const std::string& name, const Tensor& t) {
    put_tensor(out, name, t.shape(), t.data());
  });
  put_scalar(out, "meta.shifted", params.cfg.qcfs_shifted ? 1.0 : 0.0);
}

StFlowNetParams params_from(const FileContent& fc) {
  StFlowNetParams p = StFlowNetParams::init(fc.cfg, 0);
  p.for_each_param([&fc](const std::string& name, Tensor& t) {
    auto it = fc.tensors.find(name);
    if (it == fc.tensors.end()) {
      throw std::runtime_error("checkpoint: missing tensor " + name);
    }
    if (it->second.shape != t.shape()) {
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    }
    t.data() = it->second.data;
  });
  return p;
}

double scalar_at(const FileContent& fc, const std::string& name) {
  auto it = fc.tensors.find(name);
  if (it == fc.tensors.end()) throw std::runtime_error("checkpoint: missing entry " + name);
  return it->second.data.at(0);
}

}  // namespace

void save_ann(const std::string& path, const StFlowNetParams& params, int height,
              int width) {
  std::ofstream out = open_out(path, params.cfg, height, width);
  put_params(out, params);
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

StFlowNetParams load_ann(const std::string& path, int* height, int* width) {
  const FileContent fc = read_file(path);
  if (fc.tensors.count("meta.T")) {
    throw std::runtime_error("checkpoint: " + path + " holds a spiking model");
  }
  if (height) *height = fc.height;
  if (width) *width = fc.width;
  return params_from(fc);
}

void save_snn(const std::string& path, const SpikingModel& model, int height, int width) {
  std::ofstream out = open_out(path, model.params.cfg, height, width);
  put_params(out, model.params);
  for (const auto& [site, theta] : model.theta) put_scalar(out, site + ".theta", theta);
  put_scalar(out, "tau.generator", model.tau_generator);
  put_scalar(out, "tau.convgru2", model.tau_convgru2);
  put_scalar(out, "meta.T", static_cast<double>(model.time_window));
  put_scalar(out, "meta.reset", model.reset == ResetMode::kHard ? 1.0 : 0.0);
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

SpikingModel load_snn(const std::string& path, int* height, int* width) {
  const FileContent fc = read_file(path);
  if (!fc.tensors.count("meta.T")) {
    throw std::runtime_error("checkpoint: " + path + " holds a non-spiking model");
  }
  if (height) *height = fc.height;
  if (width) *width = fc.width;
  SpikingModel m;
  m.params = params_from(fc);
  for (const std::string& site : spiking_site_names(m.params.cfg)) {
    m.theta[site] = scalar_at(fc, site + ".theta");
  }
  m.tau_generator = scalar_at(fc, "tau.generator");
  m.tau_convgru2 = scalar_at(fc, "tau.convgru2");
  m.time_window = static_cast<int>(scalar_at(fc, "meta.T"));
  m.inner_repeats = std::max(1, m.time_window / m.params.cfg.n_groups);
  m.reset = scalar_at(fc, "meta.reset") != 0.0 ? ResetMode::kHard : ResetMode::kSoft;
  return m;
}

ModelKind peek_kind(const std::string& path) {
  const FileContent fc = read_file(path);
  return fc.tensors.count("meta.T") ? ModelKind::kSnn : ModelKind::kAnn;
}

}  // namespace stflow

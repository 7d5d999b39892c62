#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "stflownet.h"

namespace {

std::string tmp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "stflow_capi";
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

stfn_config* desk_config() {
  stfn_config* cfg = stfn_config_new();
  REQUIRE(stfn_config_set(cfg, "width", "16") == 0);
  REQUIRE(stfn_config_set(cfg, "height", "16") == 0);
  REQUIRE(stfn_config_set(cfg, "base_channels", "4") == 0);
  REQUIRE(stfn_config_set(cfg, "samples", "2") == 0);
  REQUIRE(stfn_config_set(cfg, "epochs", "1") == 0);
  REQUIRE(stfn_config_set(cfg, "batch", "2") == 0);
  REQUIRE(stfn_config_set(cfg, "epochs_bisnn", "1") == 0);
  REQUIRE(stfn_config_set(cfg, "max_iters", "1") == 0);
  REQUIRE(stfn_config_set(cfg, "vx", "3") == 0);
  REQUIRE(stfn_config_set(cfg, "vy", "1") == 0);
  return cfg;
}

}  // namespace

TEST_CASE("config errors use code 1 and describe the problem") {
  stfn_config* cfg = stfn_config_new();
  CHECK(stfn_config_set(cfg, "no_such_key", "1") == 1);
  CHECK(std::strlen(stfn_last_error()) > 0);
  CHECK(stfn_config_set(cfg, "epochs", "banana") == 1);
  CHECK(stfn_config_set(cfg, "epochs", "5") == 0);
  CHECK(std::strlen(stfn_last_error()) == 0);  // cleared on success
  CHECK(stfn_config_set(nullptr, "epochs", "5") == 1);
  stfn_config_free(cfg);
}

TEST_CASE("config key listing names defaults") {
  const std::string keys = stfn_config_keys();
  CHECK(keys.find("epochs=100") != std::string::npos);
  CHECK(keys.find("lr=0.0002") != std::string::npos);
  CHECK(keys.find("lambda_smooth=0.001") != std::string::npos);
}

TEST_CASE("missing files surface as data errors (code 2)") {
  stfn_config* cfg = stfn_config_new();
  const std::string dir = tmp_dir();
  CHECK(stfn_infer(cfg, (dir + "/nope.stfw").c_str(), (dir + "/nope.txt").c_str(),
                   (dir + "/out.flo").c_str(), nullptr) == 2);
  CHECK(std::strlen(stfn_last_error()) > 0);
  CHECK(stfn_visualize(cfg, (dir + "/nope.flo").c_str(), (dir + "/out.ppm").c_str()) == 2);
  stfn_config_free(cfg);
}

TEST_CASE("full pipeline through the C interface") {
  const std::string dir = tmp_dir();
  stfn_config* cfg = desk_config();

  const std::string ev = dir + "/events.txt";
  const std::string ev_bin = dir + "/events.bin";
  const std::string gt_flo = dir + "/gt.flo";
  const std::string gt_mask = dir + "/gt.pgm";
  REQUIRE(stfn_synth(cfg, ev.c_str(), "text", gt_flo.c_str(), gt_mask.c_str()) == 0);
  REQUIRE(stfn_synth(cfg, ev_bin.c_str(), "binary", nullptr, nullptr) == 0);
  CHECK(stfn_synth(cfg, ev.c_str(), "fancy", nullptr, nullptr) == 1);

  // seeded determinism of generation
  const std::string ev2 = dir + "/events2.txt";
  REQUIRE(stfn_synth(cfg, ev2.c_str(), "text", nullptr, nullptr) == 0);
  CHECK(slurp(ev) == slurp(ev2));

  const std::string ann = dir + "/ann.stfw";
  const std::string loss_csv = dir + "/loss.csv";
  REQUIRE(stfn_train(cfg, nullptr, ann.c_str(), loss_csv.c_str()) == 0);
  CHECK(slurp(loss_csv).rfind("iter,epoch,", 0) == 0);

  const std::string snn = dir + "/snn.stfw";
  REQUIRE(stfn_convert(cfg, ann.c_str(), snn.c_str()) == 0);

  // retrain with zero epochs reproduces the conversion bit for bit
  stfn_config* cfg0 = desk_config();
  REQUIRE(stfn_config_set(cfg0, "epochs_bisnn", "0") == 0);
  const std::string snn0 = dir + "/snn0.stfw";
  REQUIRE(stfn_retrain(cfg0, ann.c_str(), nullptr, snn0.c_str(), nullptr) == 0);
  CHECK(slurp(snn0) == slurp(snn));
  stfn_config_free(cfg0);

  const std::string retrained = dir + "/snn_retrained.stfw";
  REQUIRE(stfn_retrain(cfg, ann.c_str(), nullptr, retrained.c_str(), nullptr) == 0);

  const std::string flo = dir + "/pred.flo";
  const std::string ppm = dir + "/pred.ppm";
  REQUIRE(stfn_infer(cfg, snn.c_str(), ev.c_str(), flo.c_str(), ppm.c_str()) == 0);
  CHECK(slurp(flo).size() > 12);
  CHECK(slurp(ppm).rfind("P6", 0) == 0);

  const std::string metrics = dir + "/metrics.csv";
  REQUIRE(stfn_eval(cfg, ann.c_str(), ev.c_str(), gt_flo.c_str(), gt_mask.c_str(),
                    metrics.c_str()) == 0);
  const std::string mcsv = slurp(metrics);
  CHECK(mcsv.rfind("scenario,metric,value", 0) == 0);
  CHECK(mcsv.find("aee1") != std::string::npos);

  const std::string energy = dir + "/energy.csv";
  REQUIRE(stfn_energy(cfg, snn.c_str(), ev.c_str(), energy.c_str()) == 0);
  const std::string ecsv = slurp(energy);
  CHECK(ecsv.rfind("layer,kind,ops,rate,energy_j", 0) == 0);
  CHECK(ecsv.find("summary.eta") != std::string::npos);

  stfn_config* sweep_cfg = desk_config();
  REQUIRE(stfn_config_set(sweep_cfg, "grid", "2") == 0);
  const std::string sweep = dir + "/sweep.csv";
  REQUIRE(stfn_sweep(sweep_cfg, ann.c_str(), ev.c_str(), gt_flo.c_str(),
                     gt_mask.c_str(), sweep.c_str()) == 0);
  const std::string scsv = slurp(sweep);
  int rows = 0;
  for (char c : scsv) {
    if (c == '\n') ++rows;
  }
  CHECK(rows == 1 + 2 * 2);  // header plus grid cells
  stfn_config_free(sweep_cfg);

  const std::string vis = dir + "/vis.ppm";
  REQUIRE(stfn_visualize(cfg, gt_flo.c_str(), vis.c_str()) == 0);
  CHECK(slurp(vis).rfind("P6", 0) == 0);

  // mode mismatch: sweep requires an analog checkpoint
  CHECK(stfn_sweep(cfg, snn.c_str(), ev.c_str(), gt_flo.c_str(), gt_mask.c_str(),
                   sweep.c_str()) == 2);

  stfn_config_free(cfg);
  std::filesystem::remove_all(tmp_dir());
}

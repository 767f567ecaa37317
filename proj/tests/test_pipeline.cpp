#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "elg/pipeline.hpp"
#include "json.hpp"

using namespace elg;

namespace {

std::string write_tmp(const std::string& name, const std::string& body) {
  std::string path = "/tmp/elg_test_" + name;
  std::ofstream out(path);
  out << body;
  return path;
}

int count_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  int n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("node count defaults depend on the phantom") {
  ExperimentConfig cfg;
  CHECK(cfg.effective_P() == 2000);
  cfg.phantom_id = "kite";
  CHECK(cfg.effective_P() == 5000);
  cfg.P = 512;
  CHECK(cfg.effective_P() == 512);
}

TEST_CASE("regularization weight defaults come from the target table") {
  ExperimentConfig cfg;
  CHECK(cfg.effective_zeta() == 0.5);
  cfg.measurement = "R16p";
  CHECK(cfg.effective_zeta() == 0.25);
  cfg.phantom_id = "kite";
  cfg.measurement = "R100";
  CHECK(cfg.effective_zeta() == 8.0);
  cfg.csalsa_zeta = 3.25;
  CHECK(cfg.effective_zeta() == 3.25);
  cfg.csalsa_zeta.reset();
  cfg.measurement = "R200";
  CHECK_THROWS_AS(cfg.effective_zeta(), ConfigError);
}

TEST_CASE("config files parse strictly") {
  std::string good = write_tmp("good.json", R"({
    "phantom": {"id": "thin-curved", "mu1": 4.5},
    "sources": [[12, 11], [-50, 0]],
    "measurement": "R16",
    "P": 600, "h": 0.25, "snr_db": 30, "seed": 9,
    "msbl_rho": 0.01, "csalsa_zeta": 1.5,
    "refine": false, "refine_P": 200
  })");
  ExperimentConfig cfg = load_config(good);
  CHECK(cfg.phantom_id == "thin-curved");
  CHECK(cfg.phantom_overrides.at("mu1") == 4.5);
  CHECK(cfg.sources.size() == 2);
  CHECK(cfg.sources[1] == Vec2(-50, 0));
  CHECK(cfg.measurement == "R16");
  CHECK(cfg.P == 600);
  CHECK(cfg.h == 0.25);
  CHECK(cfg.snr_db == 30.0);
  CHECK(cfg.seed == 9);
  CHECK(cfg.msbl_rho == 0.01);
  REQUIRE(cfg.csalsa_zeta.has_value());
  CHECK(*cfg.csalsa_zeta == 1.5);
  CHECK(cfg.refine == false);
  CHECK(cfg.refine_P == 200);

  CHECK_THROWS_AS(load_config(write_tmp("unknown.json", R"({"speed": 3})")), ConfigError);
  CHECK_THROWS_AS(load_config(write_tmp("badrefine.json", R"({"refine": 1})")), ConfigError);
  CHECK_THROWS_AS(load_config(write_tmp("badrefp.json", R"({"refine_P": 4})")), ConfigError);
  CHECK_THROWS_AS(load_config(write_tmp("broken.json", "{")), ConfigError);
  CHECK_THROWS_AS(load_config(write_tmp("badsrc.json", R"({"sources": [[1]]})")), ConfigError);
  CHECK_THROWS_AS(load_config(write_tmp("badmeas.json", R"({"measurement": "R7"})")),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/tmp/elg_no_such_config.json"), ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  ExperimentConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_json(a) == config_json(b));
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("forward data files round trip") {
  ExperimentConfig cfg;
  cfg.P = 128;
  cfg.measurement = "R16";
  ForwardData fd = run_forward(cfg);
  REQUIRE(fd.data.size() == 4);
  CHECK(fd.measurement_points.cols() == 16);
  std::string path = "/tmp/elg_test_fwd.json";
  save_forward_data(fd, path);
  ForwardData back = load_forward_data(path);
  CHECK(back.phantom_id == fd.phantom_id);
  CHECK(back.snr_db == fd.snr_db);
  CHECK(back.seed == fd.seed);
  CHECK(back.sources.size() == fd.sources.size());
  CHECK((back.measurement_points - fd.measurement_points).norm() == 0.0);
  for (size_t m = 0; m < fd.data.size(); ++m)
    CHECK((back.data[m] - fd.data[m]).norm() == 0.0);
  CHECK_THROWS_AS(load_forward_data("/tmp/elg_no_such_fwd.json"), ConfigError);
}

TEST_CASE("output files follow the documented schema") {
  Phantom ph = make_phantom("sparse-disks");
  ReconstructionResult res;
  res.config = ExperimentConfig{};
  res.grid = interior_grid(ph, 1.0);
  Eigen::Index L = res.grid.size();
  res.support = {3, 5, 11};
  res.psi = VecX::LinSpaced(L, 0.0, 1.0);
  res.lambda_map = VecX::Constant(3, 4.0);
  res.mu_map = VecX::Constant(3, 2.0);
  res.metrics = compute_metrics(res, ph);
  res.diagnostics["msbl_iterations"] = 7;

  std::string dir = "/tmp/elg_test_out";
  emit_outputs(res, dir);

  std::ifstream in(dir + "/result.json");
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  CHECK(j.at("config").at("hash").get<std::string>() == config_hash(res.config));
  CHECK(j.at("support").size() == 3);
  CHECK(j.at("psi").size() == static_cast<size_t>(L));
  CHECK(j.at("lambda_map").size() == 3);
  CHECK(j.at("mu_map").size() == 3);
  CHECK(j.at("metrics").at("jaccard").get<double>() == res.metrics.jaccard);
  CHECK(j.at("metrics").at("mu_order").size() == ph.inclusions.size());
  CHECK(j.at("diagnostics").at("msbl_iterations").get<double>() == 7.0);
  CHECK(j.at("diagnostics").at("empty_support").get<bool>() == false);

  CHECK(count_lines(dir + "/psi.csv") == static_cast<int>(L) + 1);
  CHECK(count_lines(dir + "/lambda.csv") == 4);
  CHECK(count_lines(dir + "/mu.csv") == 4);
  std::ifstream csv(dir + "/lambda.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "index,x,y,value");
}

TEST_CASE("reconstruction runs end to end and is deterministic") {
  ExperimentConfig cfg;
  cfg.P = 256;
  cfg.refine = false;  // the polish has its own case below; keep this one fast
  ForwardData fd = run_forward(cfg);
  ReconstructionResult a = run_reconstruct(fd, cfg);
  CHECK(a.psi.size() == a.grid.size());
  CHECK_FALSE(a.empty_support);
  REQUIRE(!a.support.empty());
  CHECK(a.lambda_map.size() == static_cast<Eigen::Index>(a.support.size()));
  CHECK(a.mu_map.size() == a.lambda_map.size());
  CHECK(a.metrics.jaccard >= 0.0);
  CHECK(a.metrics.jaccard <= 1.0);
  CHECK(a.metrics.mu_order.size() == 3);
  CHECK(a.diagnostics.count("msbl_iterations") == 1);
  CHECK(a.diagnostics.count("csalsa_iterations") == 1);
  CHECK(a.diagnostics.at("csalsa_residual") <= a.diagnostics.at("csalsa_eta") + 1e-6);

  ReconstructionResult b = run_reconstruct(fd, cfg);
  REQUIRE(b.support.size() == a.support.size());
  for (size_t i = 0; i < a.support.size(); ++i) CHECK(a.support[i] == b.support[i]);
  CHECK((a.psi - b.psi).norm() == 0.0);
  CHECK((a.lambda_map - b.lambda_map).norm() == 0.0);
  CHECK((a.mu_map - b.mu_map).norm() == 0.0);

  ExperimentConfig bad = cfg;
  bad.phantom_id = "kite";
  CHECK_THROWS_AS(run_reconstruct(fd, bad), ConfigError);
}

TEST_CASE("disk polish reports its verdict and stays deterministic") {
  ExperimentConfig cfg;
  cfg.P = 256;
  cfg.refine_P = 64;  // coarse solves keep the case quick; the verdict fields still appear
  ForwardData fd = run_forward(cfg);
  ReconstructionResult a = run_reconstruct(fd, cfg);
  REQUIRE(a.diagnostics.count("refine_components") == 1);
  REQUIRE(a.diagnostics.count("refine_rel_misfit") == 1);
  REQUIRE(a.diagnostics.count("refine_accepted") == 1);
  CHECK(a.diagnostics.at("refine_components") >= 1.0);
  CHECK(a.diagnostics.at("refine_rel_misfit") > 0.0);

  ReconstructionResult b = run_reconstruct(fd, cfg);
  CHECK(a.diagnostics.at("refine_rel_misfit") == b.diagnostics.at("refine_rel_misfit"));
  CHECK((a.lambda_map - b.lambda_map).norm() == 0.0);
  CHECK((a.mu_map - b.mu_map).norm() == 0.0);

  ExperimentConfig off = cfg;
  off.refine = false;
  ReconstructionResult c = run_reconstruct(fd, off);
  CHECK(c.diagnostics.count("refine_rel_misfit") == 0);
}

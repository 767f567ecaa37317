#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "elg/pipeline.hpp"

namespace {

elg::ExperimentConfig make_config(const std::string& config_path,
                                  std::optional<unsigned long long> seed) {
  elg::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = elg::load_config(config_path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

void print_catalog() {
  const char* ids[] = {"sparse-disks", "thin-straight", "thin-curved", "kite"};
  std::printf("[\n");
  bool first = true;
  for (const char* id : ids) {
    elg::Phantom ph = elg::make_phantom(id);
    std::printf("%s  {\"id\": \"%s\", \"inclusions\": %zu, \"lambda0\": %g, \"mu0\": %g}",
                first ? "" : ",\n", id, ph.inclusions.size(), ph.lambda0, ph.mu0);
    first = false;
  }
  std::printf("\n]\n");
}

}  // namespace

int main(int argc, char** argv) {
  elg::apply_thread_limit();
  CLI::App app{"Elastic inclusion imaging: boundary-integral forward solver and "
               "two-step sparse reconstruction"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", data_path;
  std::optional<unsigned long long> seed;
  bool verbose = false;
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "override the config seed");
  app.add_flag("--verbose", verbose, "per-iteration traces on stderr");

  CLI::App* fwd = app.add_subcommand("forward", "simulate boundary data");
  CLI::App* rec = app.add_subcommand("reconstruct", "two-step reconstruction from a data file");
  rec->add_option("data", data_path, "forward-data file (JSON)")->required();
  CLI::App* pipe = app.add_subcommand("pipeline", "forward simulation plus reconstruction");
  CLI::App* cat = app.add_subcommand("phantoms", "list the phantom catalog");
  for (CLI::App* sub : {fwd, rec, pipe, cat}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cat->parsed()) {
      print_catalog();
      return 0;
    }
    elg::ExperimentConfig cfg = make_config(config_path, seed);
    if (fwd->parsed()) {
      elg::ForwardData fd = elg::run_forward(cfg, verbose);
      std::filesystem::create_directories(out_dir);
      elg::save_forward_data(fd, out_dir + "/forward_data.json");
      std::printf("wrote %s/forward_data.json\n", out_dir.c_str());
      return 0;
    }
    elg::ForwardData fd;
    if (rec->parsed())
      fd = elg::load_forward_data(data_path);
    else  // pipeline
      fd = elg::run_forward(cfg, verbose);
    elg::ReconstructionResult res = elg::run_reconstruct(fd, cfg, verbose);
    if (pipe->parsed()) {
      std::filesystem::create_directories(out_dir);
      elg::save_forward_data(fd, out_dir + "/forward_data.json");
    }
    elg::emit_outputs(res, out_dir);
    std::printf("wrote %s/result.json (jaccard %.4f%s)\n", out_dir.c_str(),
                res.metrics.jaccard, res.empty_support ? ", empty support" : "");
    if (res.empty_support) return 4;
    return 0;
  } catch (const elg::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const elg::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const elg::EmptySupportError& e) {
    std::fprintf(stderr, "empty support: %s\n", e.what());
    return 4;
  }
}

#ifndef ELG_PIPELINE_HPP
#define ELG_PIPELINE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "elg/csalsa.hpp"
#include "elg/forward.hpp"
#include "elg/msbl.hpp"

namespace elg {

struct ExperimentConfig {
  std::string phantom_id = "sparse-disks";
  PhantomOverrides phantom_overrides;
  std::vector<Vec2> sources = {{12, 11}, {9, -11}, {-1, 8}, {-50, 0}};
  std::string measurement = "R32";
  int P = 0;            // 0: default by phantom (2000 sparse-disks, 5000 otherwise)
  double h = 1.0 / 3.0;
  double snr_db = 40.0;
  unsigned long long seed = 1;
  // step one
  int msbl_iter_max = 50;
  double msbl_rho = 1e-3;
  double theta_scale = 1e-2;
  double xi = 0.0;
  // step two
  std::optional<double> csalsa_zeta;  // default from the per-target table
  double tau_scale = 0.1;
  double eta_scale = 0.3;
  // model polish: per-component disk fit against the measured data
  bool refine = true;
  int refine_P = 256;  // boundary nodes for the polish forward solves

  int effective_P() const;
  double effective_zeta() const;
};

/// Strict JSON parsing; unknown keys raise ConfigError.
ExperimentConfig load_config(const std::string& path);
std::string config_json(const ExperimentConfig& cfg);   // canonical serialization
std::string config_hash(const ExperimentConfig& cfg);   // stable hex digest

/// Forward-data file payload ({phantom_id, sources, measurement_points, snr_db, seed, data}).
struct ForwardData {
  std::string phantom_id;
  PhantomOverrides phantom_overrides;
  std::vector<Vec2> sources;
  Eigen::Matrix2Xd measurement_points;
  double snr_db = 0.0;
  unsigned long long seed = 0;
  std::vector<Eigen::Matrix2Xd> data;  // (u - U)(x_r) per excitation
};

ForwardData run_forward(const ExperimentConfig& cfg, bool verbose = false);
void save_forward_data(const ForwardData& fd, const std::string& path);
ForwardData load_forward_data(const std::string& path);

struct InclusionMetrics {
  double mean_lambda = 0.0;
  double mean_mu = 0.0;
  double rel_err_lambda = 0.0;
  double rel_err_mu = 0.0;
  int cells = 0;
};

struct Metrics {
  double jaccard = 0.0;  // vs one-cell-dilated truth
  std::vector<InclusionMetrics> per_inclusion;
  std::vector<int> mu_order;  // inclusion indices sorted by descending mean mu
};

struct ReconstructionResult {
  ExperimentConfig config;
  InteriorGrid grid;
  std::vector<Eigen::Index> support;
  VecX psi;                     // over the full grid
  VecX lambda_map;              // on the support
  VecX mu_map;
  Metrics metrics;
  std::map<std::string, double> diagnostics;
  bool empty_support = false;   // partial result: stopped after step one
};

/// Full two-step reconstruction from a forward-data file payload.
ReconstructionResult run_reconstruct(const ForwardData& fd, const ExperimentConfig& cfg,
                                     bool verbose = false);

Metrics compute_metrics(const ReconstructionResult& result, const Phantom& truth);

/// Writes result.json plus psi.csv, lambda.csv, mu.csv under out_dir.
void emit_outputs(const ReconstructionResult& result, const std::string& out_dir);

/// Worker cap from ELG_THREADS (applies to Eigen's internal parallelism).
void apply_thread_limit();

}  // namespace elg

#endif

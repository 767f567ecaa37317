#ifndef ELG_CSALSA_HPP
#define ELG_CSALSA_HPP

#include <functional>
#include <vector>

#include "elg/sensing.hpp"
#include "elg/types.hpp"

namespace elg {

/// Componentwise sign(s) max(|s| - tau, 0).
VecX soft_threshold(const VecX& s, double tau);

/// Euclidean projection onto the closed ball B_eta(center).
VecX project_ball(const VecX& s, const VecX& center, double eta);

struct CsalsaOptions {
  double zeta = 1.0;        // data fidelity weight (Table of per-target defaults upstream)
  double tau_scale = 0.1;   // tau = tau_scale * mean |Z_0|
  double eta_scale = 0.3;   // eta = eta_scale * |Y|_2
  double stop_tol = 1e-4;   // relative cost change
  int iter_max = 2000;
  std::function<void(int, double, double)> on_iteration;  // k, cost, residual
};

struct CsalsaState {
  VecX Z;
  double tau = 0.0;
  double eta = 0.0;
  int iterations = 0;
  bool converged = false;
  double final_cost = 0.0;
  double residual = 0.0;  // |Y - Pi Z|_2 at exit
};

/// ADMM for min zeta |Z|_1 s.t. |Y - Pi Z|_2 <= eta. Pi should be column-normalized.
CsalsaState csalsa_solve(const MatX& Pi, const VecX& Y, const CsalsaOptions& opts = {});

struct ParameterMaps {
  VecX Z;        // unnormalized contrast vector, 5 Lt
  VecX lambda;   // lambda-hat per support point
  VecX mu;       // mu-hat per support point
};

/// Divides by saved column norms, then lambda = lambda0 - Z_1 and mu = mu0 - mean of
/// components 2..5 (zero-norm components excluded from the mean).
ParameterMaps fields_from_Z(const VecX& Z_normalized, const StepTwoMatrix& Pi, double lambda0,
                            double mu0);

}  // namespace elg

#endif

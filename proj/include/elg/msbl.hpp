#ifndef ELG_MSBL_HPP
#define ELG_MSBL_HPP

#include <functional>
#include <vector>

#include "elg/types.hpp"

namespace elg {

struct MsblOptions {
  int iter_max = 50;
  double rho = 1e-3;             // relative pruning threshold on g
  double stop_tol = 1e-2;        // relative plateau tolerance on the noise estimate
  int blocks = 5;                // tied blocks stacked in X (d^2 + 1)
  std::function<void(int, double, int, double)> on_iteration;  // k, zeta, active, residual
};

struct MsblState {
  VecX g;      // block-tied hyperparameters, length blocks * L
  double zeta = 0.0;
  int iterations = 0;
  MatX X;      // blocks*L x M estimate
};

/// Modified M-SBL with block-tied hyperparameters and hard pruning. Pi is the matrix
/// actually passed in (precondition beforehand); zeta0 = 10 sigma_max(Pi)^2.
MsblState msbl_solve(const MatX& Pi, const MatX& Y, const MsblOptions& opts = {});

struct SupportEstimate {
  std::vector<Eigen::Index> indices;  // selected l, ascending
  VecX psi;                           // row powers, length L
  double xi = 0.0;
  bool empty_flagged = false;
};

/// psi_l = sqrt(sum_{q,m} X(l + qL, m)^2); keeps l with psi_l / max psi > xi.
SupportEstimate identify_support(const MatX& X, Eigen::Index L, double xi = 0.0, int blocks = 5);

}  // namespace elg

#endif

#ifndef ELG_SENSING_HPP
#define ELG_SENSING_HPP

#include <vector>

#include "elg/geometry.hpp"
#include "elg/kernels.hpp"

namespace elg {

/// Step-one sensing matrix, 2R x 5L. Row blocks by component p, column blocks by
/// kernel coordinate q; entry (p,q,r,l) = h^2 [Lambda(x_r, y_l)]_{pq} (midpoint rule
/// on piecewise-constant cell basis functions).
struct SensingMatrix {
  MatX Pi;
  double h = 0.0;
  Eigen::Matrix2Xd points;  // generating measurement points
  int R = 0;
  Eigen::Index L = 0;
};

/// Throws NumericalError if any grid point comes within `min_separation` (half the
/// default boundary margin) of a measurement point.
SensingMatrix assemble_Pi(const Eigen::Matrix2Xd& points, const InteriorGrid& grid,
                          const KernelConstants& k, double min_separation = 0.25);

/// P = (Sigma^2 + theta I)^{-1/2} V^T from the eigendecomposition of Pi Pi^T.
struct Preconditioner {
  MatX P;        // 2R x 2R
  VecX sigma;    // singular values of Pi, descending
  double theta = 0.0;
};

Preconditioner svd_preconditioner(const SensingMatrix& Pi, double theta_scale = 1e-2);

/// Per-excitation divergence and strain weights of the estimated interior field,
/// sampled on the step-two support points.
struct FieldWeights {
  VecX div;                  // div u_m at each support point
  std::vector<Mat2> strain;  // E[u_m] at each support point
};

/// Step-two matrix, 2RM x 5Lt, columns normalized to unit l2 norm with norms saved.
/// Zero columns keep norm 0 and are left unnormalized.
struct StepTwoMatrix {
  MatX Pi;
  VecX col_norms;
  int R = 0;
  int M = 0;
  Eigen::Index Lt = 0;
  std::vector<Eigen::Index> zero_columns;
};

StepTwoMatrix assemble_Pi_tilde(const Eigen::Matrix2Xd& support_points, double h,
                                const std::vector<FieldWeights>& fields,
                                const Eigen::Matrix2Xd& meas_points, const KernelConstants& k);

}  // namespace elg

#endif

#ifndef ELG_FILTERING_HPP
#define ELG_FILTERING_HPP

#include <vector>

#include "elg/forward.hpp"
#include "elg/potentials.hpp"

namespace elg {

/// Periodic cubic spline through (t_j, f_j) on the unit circle of parameters.
/// Knots must be strictly increasing in [0,1).
class PeriodicCubicSpline {
 public:
  PeriodicCubicSpline(const VecX& knots, const VecX& values);
  double operator()(double t) const;

 private:
  VecX t_, f_, m_;  // knots, values, second derivatives
};

/// Componentwise periodic spline through the R samples, evaluated at P' uniform nodes.
/// Returns one node-major vector (2P') per excitation. Requires R >= 8.
std::vector<VecX> spline_densify(const MeasurementSet& ms, int P_prime);

struct FilteredData {
  std::vector<Eigen::Matrix2Xd> Y;      // Y_m at the R measurement points
  std::vector<VecX> dense;              // intermediate dense samples at the P' nodes
  std::vector<VecX> dense_filtered;     // (-1/2 I + K) applied at the P' nodes
};

/// Applies the discrete Calderon filter (-1/2 I + K) to dense samples on the node set
/// of `ops` and splines the result back to the measurement parameters.
FilteredData calderon_filter(const std::vector<VecX>& dense, const BoundaryOperatorSet& ops,
                             const VecX& eval_params);

}  // namespace elg

#endif

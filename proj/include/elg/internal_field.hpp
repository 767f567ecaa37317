#ifndef ELG_INTERNAL_FIELD_HPP
#define ELG_INTERNAL_FIELD_HPP

#include <vector>

#include "elg/forward.hpp"
#include "elg/geometry.hpp"
#include "elg/msbl.hpp"
#include "elg/potentials.hpp"

namespace elg {

/// Estimated total field on the support plus a one-cell halo.
struct InternalFieldEstimate {
  std::vector<Eigen::Index> support;        // original grid indices of the support
  std::vector<Eigen::Index> halo;           // grid indices of support + halo
  std::vector<Eigen::Matrix2Xd> u;          // u_m at every halo point, one 2xH block per m
  std::vector<VecX> div;                    // per m, at support points only
  std::vector<std::vector<Mat2>> strain;    // per m, at support points only
  int clipped_halo = 0;                     // halo cells falling outside the grid
  int isolated_points = 0;                  // support points with no stencil neighbor
};

/// u_m = U_m + D_Omega[(u-U)|boundary] - grid quadrature of Lambda . X over the support,
/// with the self-cell term zeroed (odd-kernel parity). `dense_du` are node-major dense
/// samples of (u - U) on ops.bd; X is the step-one estimate (5L x M).
InternalFieldEstimate estimate_displacement(const MatX& X, const SupportEstimate& sup,
                                            const InteriorGrid& grid,
                                            const std::vector<BackgroundField>& background,
                                            const std::vector<VecX>& dense_du,
                                            const BoundaryOperatorSet& ops);

/// Central differences with spacing h on the halo'd field; second-order one-sided
/// stencils where the halo is clipped. Fills `div` and `strain` of the estimate.
void div_and_strain(InternalFieldEstimate& est, const InteriorGrid& grid);

}  // namespace elg

#endif

#ifndef ELG_POTENTIALS_HPP
#define ELG_POTENTIALS_HPP

#include "elg/geometry.hpp"
#include "elg/kernels.hpp"

namespace elg {

enum OperatorChoice : unsigned {
  kAssembleS = 1u,
  kAssembleK = 2u,
  kAssembleKstar = 4u,
  kAssembleAll = 7u,
};

/// Nystrom matrices of the boundary integral operators on one closed curve.
/// Principal-value diagonals are zeroed (uniform trapezoid rule on smooth closed
/// curves cancels the leading Cauchy-singular part by odd symmetry).
struct BoundaryOperatorSet {
  MatX S;      // single layer, 2P x 2P (empty if not assembled)
  MatX K;      // Neumann-Poincare
  MatX Kstar;  // L2 adjoint of K under the quadrature inner product
  DiscretizedBoundary bd;
  KernelConstants k;
};

BoundaryOperatorSet assemble_operators(const DiscretizedBoundary& bd, const KernelConstants& k,
                                       unsigned which = kAssembleAll);

/// Quadrature sum of traction_kernel(x, y_p, nu_p) phi_p |x'_p| w_p at an off-curve point.
/// phi is stored node-major: (phi_0x, phi_0y, phi_1x, ...).
Vec2 eval_double_layer(const DiscretizedBoundary& bd, const VecX& phi, const Vec2& x,
                       const KernelConstants& k);

/// Quadrature sum of kelvin_matrix(x - y_p) phi_p |x'_p| w_p.
Vec2 eval_single_layer(const DiscretizedBoundary& bd, const VecX& phi, const Vec2& x,
                       const KernelConstants& k);

/// Traction of the single layer at an off-curve point x with normal nu there.
Vec2 eval_single_layer_traction(const DiscretizedBoundary& bd, const VecX& phi, const Vec2& x,
                                const Vec2& nu_x, const KernelConstants& k);

/// Divergence and strain of the single layer at an off-curve point (analytic kernels).
double eval_single_layer_div(const DiscretizedBoundary& bd, const VecX& phi, const Vec2& x,
                             const KernelConstants& k);
Mat2 eval_single_layer_strain(const DiscretizedBoundary& bd, const VecX& phi, const Vec2& x,
                              const KernelConstants& k);

}  // namespace elg

#endif

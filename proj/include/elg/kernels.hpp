#ifndef ELG_KERNELS_HPP
#define ELG_KERNELS_HPP

#include "elg/types.hpp"

namespace elg {

/// Constants of the 2D Kelvin matrix and its traction kernel.
/// alpha, beta from the fundamental solution; a = beta - alpha holds exactly.
struct KernelConstants {
  double lambda0 = 0.0;
  double mu0 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// Requires mu0 > 0 and lambda0 + 2 mu0 > 0 (strong convexity); throws ConfigError.
KernelConstants kernel_constants(double lambda0, double mu0);

/// Gamma(x) = alpha ln|x| I - (beta/|x|^2) x x^T. Symmetric, even in x.
Mat2 kelvin_matrix(const Vec2& x, const KernelConstants& k);

/// Traction kernel P_ij(r, nu), r = x - y, nu the unit normal attached to y:
///   [a d_ij + b r_i r_j/|r|^2] (nu.r/|r|^2) - a (nu_j r_i - nu_i r_j)/|r|^2.
/// Used directly for the double layer; the adjoint kernel is its transpose with
/// arguments swapped (odd homogeneity of degree -1 handles the sign).
Mat2 traction_kernel(const Vec2& x, const Vec2& y, const Vec2& nu_y, const KernelConstants& k);

/// div_y Gamma(x,y) = (a/mu0) (x - y)/|x - y|^2.
Vec2 div_kelvin(const Vec2& x, const Vec2& y, const KernelConstants& k);

/// Strain-of-Kelvin tensor E_ijk, symmetric in (j,k); slice i is returned as row i
/// of a stacked 4x2 matrix (rows 2i, 2i+1 hold the 2x2 slice for index i).
struct StrainKelvin {
  Mat2 slice[2];  // slice[i](j,k) = E_ijk
};
StrainKelvin strain_kelvin(const Vec2& x, const Vec2& y, const KernelConstants& k);

/// Row-block kernel Lambda(x,y) in R^{2x5}: row i = [A^i, vec(B^i)^T] with
/// A^i = [div_y Gamma]_i and B^i = slice_1(i, strain of Kelvin); vec is column-major.
Eigen::Matrix<double, 2, 5> lambda_block(const Vec2& x, const Vec2& y, const KernelConstants& k);

}  // namespace elg

#endif

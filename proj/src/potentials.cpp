#include "elg/potentials.hpp"
#include <cmath>
#include <numbers>

namespace elg {

namespace {

/// Signed curvature at every node from periodic central differences of x'(t).
VecX node_curvature(const DiscretizedBoundary& bd) {
  Eigen::Index P = bd.size();
  Eigen::Matrix2Xd xp(2, P);
  for (Eigen::Index p = 0; p < P; ++p) {
    Vec2 tau(-bd.normals(1, p), bd.normals(0, p));
    xp.col(p) = bd.speeds[p] * tau;
  }
  VecX kappa(P);
  double dt = 1.0 / static_cast<double>(P);
  for (Eigen::Index p = 0; p < P; ++p) {
    Vec2 xpp = (xp.col((p + 1) % P) - xp.col((p + P - 1) % P)) / (2.0 * dt);
    double s = bd.speeds[p];
    kappa[p] = (xp(0, p) * xpp.y() - xp(1, p) * xpp.x()) / (s * s * s);
  }
  return kappa;
}

}  // namespace

BoundaryOperatorSet assemble_operators(const DiscretizedBoundary& bd, const KernelConstants& k,
                                       unsigned which) {
  BoundaryOperatorSet ops;
  ops.bd = bd;
  ops.k = k;
  Eigen::Index P = bd.size();
  bool wantS = which & kAssembleS, wantK = which & kAssembleK, wantKs = which & kAssembleKstar;
  if (wantS) ops.S.setZero(2 * P, 2 * P);
  if (wantK) ops.K.setZero(2 * P, 2 * P);
  if (wantKs) ops.Kstar.setZero(2 * P, 2 * P);
  VecX kappa;
  if (wantK || wantKs) kappa = node_curvature(bd);
  for (Eigen::Index p = 0; p < P; ++p) {
    Vec2 xp = bd.points.col(p);
    for (Eigen::Index q = 0; q < P; ++q) {
      double sq = bd.ds(q);
      if (p == q) {
        if (wantS) {
          // Singularity subtraction for the log kernel: splitting
          // ln|x_p - x(s)| = ln(2|sin pi(t_p - s)|) + smooth and using the exact
          // punctured-trapezoid sum of the first part leaves this diagonal.
          Vec2 tau(-bd.normals(1, p), bd.normals(0, p));
          double lg = std::log(bd.speeds[p] /
                               (2.0 * std::numbers::pi * static_cast<double>(P)));
          ops.S.block<2, 2>(2 * p, 2 * p) =
              (k.alpha * lg * Mat2::Identity() - k.beta * (tau * tau.transpose())) * sq;
        }
        // Cauchy-singular part cancels by parity; the smooth limit of the
        // normal-component factor is -kappa/2 times the symmetric bracket.
        if (wantK || wantKs) {
          Vec2 tau(-bd.normals(1, p), bd.normals(0, p));
          Mat2 diag = -(kappa[p] / 2.0) *
                      (k.a * Mat2::Identity() + k.b * (tau * tau.transpose())) * sq;
          if (wantK) ops.K.block<2, 2>(2 * p, 2 * p) = diag;
          if (wantKs) ops.Kstar.block<2, 2>(2 * p, 2 * p) = diag;
        }
        continue;
      }
      Vec2 yq = bd.points.col(q);
      if (wantS) ops.S.block<2, 2>(2 * p, 2 * q) = kelvin_matrix(xp - yq, k) * sq;
      if (wantK || wantKs) {
        // The rotation-type part of the traction kernel is Cauchy singular. It is
        // split off as a pi cot(pi dt) E and requadratured with the alternating
        // trapezoid rule, which is spectrally accurate for Hilbert kernels; the
        // sqrt speed ratio keeps the discrete adjointness of K and K* exact.
        Mat2 E;
        E << 0.0, 1.0, -1.0, 0.0;
        double dt = bd.params[p] - bd.params[q];
        double cot = std::cos(std::numbers::pi * dt) / std::sin(std::numbers::pi * dt);
        double sgn = ((p - q) % 2 != 0) ? 1.0 : -1.0;
        Mat2 corr = sgn * k.a * std::numbers::pi * cot *
                    std::sqrt(bd.speeds[q] / bd.speeds[p]) * E / static_cast<double>(P);
        if (wantK)
          ops.K.block<2, 2>(2 * p, 2 * q) =
              traction_kernel(xp, yq, bd.normals.col(q), k) * sq + corr;
        if (wantKs)
          ops.Kstar.block<2, 2>(2 * p, 2 * q) =
              traction_kernel(yq, xp, bd.normals.col(p), k).transpose() * sq + corr;
      }
    }
  }
  return ops;
}

Vec2 eval_double_layer(const DiscretizedBoundary& bd, const VecX& phi, const Vec2& x,
                       const KernelConstants& k) {
  Vec2 out = Vec2::Zero();
  for (Eigen::Index p = 0; p < bd.size(); ++p)
    out += traction_kernel(x, bd.points.col(p), bd.normals.col(p), k) *
           phi.segment<2>(2 * p) * bd.ds(p);
  return out;
}

Vec2 eval_single_layer(const DiscretizedBoundary& bd, const VecX& phi, const Vec2& x,
                       const KernelConstants& k) {
  Vec2 out = Vec2::Zero();
  for (Eigen::Index p = 0; p < bd.size(); ++p)
    out += kelvin_matrix(x - bd.points.col(p), k) * phi.segment<2>(2 * p) * bd.ds(p);
  return out;
}

Vec2 eval_single_layer_traction(const DiscretizedBoundary& bd, const VecX& phi, const Vec2& x,
                                const Vec2& nu_x, const KernelConstants& k) {
  Vec2 out = Vec2::Zero();
  for (Eigen::Index p = 0; p < bd.size(); ++p)
    out += traction_kernel(bd.points.col(p), x, nu_x, k).transpose() * phi.segment<2>(2 * p) *
           bd.ds(p);
  return out;
}

double eval_single_layer_div(const DiscretizedBoundary& bd, const VecX& phi, const Vec2& x,
                             const KernelConstants& k) {
  double out = 0.0;
  for (Eigen::Index p = 0; p < bd.size(); ++p)
    out -= div_kelvin(x, bd.points.col(p), k).dot(phi.segment<2>(2 * p)) * bd.ds(p);
  return out;
}

Mat2 eval_single_layer_strain(const DiscretizedBoundary& bd, const VecX& phi, const Vec2& x,
                              const KernelConstants& k) {
  Mat2 out = Mat2::Zero();
  for (Eigen::Index p = 0; p < bd.size(); ++p) {
    StrainKelvin e = strain_kelvin(bd.points.col(p), x, k);
    Vec2 f = phi.segment<2>(2 * p) * bd.ds(p);
    out += e.slice[0] * f[0] + e.slice[1] * f[1];
  }
  return out;
}

}  // namespace elg

#include "elg/kernels.hpp"

#include <cmath>
#include <numbers>

namespace elg {

KernelConstants kernel_constants(double lambda0, double mu0) {
  if (!(mu0 > 0.0) || !(lambda0 + 2.0 * mu0 > 0.0))
    throw ConfigError("Lame pair outside the strongly convex range (mu > 0, lambda + 2 mu > 0)");
  KernelConstants k;
  k.lambda0 = lambda0;
  k.mu0 = mu0;
  const double pi = std::numbers::pi;
  k.alpha = (lambda0 + 3.0 * mu0) / (4.0 * pi * mu0 * (lambda0 + 2.0 * mu0));
  k.beta = (lambda0 + mu0) / (4.0 * pi * mu0 * (lambda0 + 2.0 * mu0));
  k.a = -mu0 / (2.0 * pi * (lambda0 + 2.0 * mu0));
  k.b = -(lambda0 + mu0) / (pi * (lambda0 + 2.0 * mu0));
  return k;
}

Mat2 kelvin_matrix(const Vec2& x, const KernelConstants& k) {
  double r2 = x.squaredNorm();
  return k.alpha * 0.5 * std::log(r2) * Mat2::Identity() - (k.beta / r2) * (x * x.transpose());
}

Mat2 traction_kernel(const Vec2& x, const Vec2& y, const Vec2& nu_y, const KernelConstants& k) {
  Vec2 r = x - y;
  double r2 = r.squaredNorm();
  double nr = nu_y.dot(r) / r2;
  Mat2 out = (k.a * Mat2::Identity() + (k.b / r2) * (r * r.transpose())) * nr;
  out.noalias() -= (k.a / r2) * (r * nu_y.transpose() - nu_y * r.transpose());
  return out;
}

Vec2 div_kelvin(const Vec2& x, const Vec2& y, const KernelConstants& k) {
  Vec2 r = x - y;
  return (k.a / k.mu0) * r / r.squaredNorm();
}

StrainKelvin strain_kelvin(const Vec2& x, const Vec2& y, const KernelConstants& k) {
  Vec2 r = x - y;
  double r2 = r.squaredNorm();
  // The shared coefficient is beta - alpha = a / mu0; it coincides with a when mu0 = 1.
  double c = k.beta - k.alpha;
  StrainKelvin e;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int kk = 0; kk < 2; ++kk) {
        double v = 0.0;
        if (i == j) v += 0.5 * c * r[kk] / r2;
        if (i == kk) v += 0.5 * c * r[j] / r2;
        if (j == kk) v += k.beta * r[i] / r2;
        v -= 2.0 * k.beta * r[i] * r[j] * r[kk] / (r2 * r2);
        e.slice[i](j, kk) = v;
      }
    }
  }
  return e;
}

Eigen::Matrix<double, 2, 5> lambda_block(const Vec2& x, const Vec2& y, const KernelConstants& k) {
  Eigen::Matrix<double, 2, 5> out;
  Vec2 dv = div_kelvin(x, y, k);
  StrainKelvin e = strain_kelvin(x, y, k);
  for (int i = 0; i < 2; ++i) {
    out(i, 0) = dv[i];
    // column-major vec of the 2x2 slice: (1,1), (2,1), (1,2), (2,2)
    out(i, 1) = e.slice[i](0, 0);
    out(i, 2) = e.slice[i](1, 0);
    out(i, 3) = e.slice[i](0, 1);
    out(i, 4) = e.slice[i](1, 1);
  }
  return out;
}

}  // namespace elg

#include "elg/filtering.hpp"

#include <algorithm>
#include <cmath>

namespace elg {

namespace {

/// Cyclic tridiagonal solve (Thomas plus a rank-one Sherman-Morrison correction).
VecX solve_cyclic_tridiag(const VecX& sub, const VecX& diag, const VecX& sup, const VecX& rhs) {
  Eigen::Index n = diag.size();
  if (n < 4) {
    MatX A = MatX::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      A(i, i) = diag[i];
      A(i, (i + 1) % n) += sup[i];
      A(i, (i + n - 1) % n) += sub[i];
    }
    return A.partialPivLu().solve(rhs);
  }
  auto thomas = [&](VecX d, VecX b) {
    VecX c = sup;
    for (Eigen::Index i = 1; i < n; ++i) {
      double w = sub[i] / d[i - 1];
      d[i] -= w * c[i - 1];
      b[i] -= w * b[i - 1];
    }
    b[n - 1] /= d[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i) b[i] = (b[i] - c[i] * b[i + 1]) / d[i];
    return b;
  };
  double gamma = -diag[0];
  VecX d = diag;
  d[0] -= gamma;
  d[n - 1] -= sup[n - 1] * sub[0] / gamma;
  VecX u = VecX::Zero(n);
  u[0] = gamma;
  u[n - 1] = sup[n - 1];
  VecX y = thomas(d, rhs);
  VecX q = thomas(d, u);
  double fact = (y[0] + sub[0] * y[n - 1] / gamma) / (1.0 + q[0] + sub[0] * q[n - 1] / gamma);
  return y - fact * q;
}

}  // namespace

PeriodicCubicSpline::PeriodicCubicSpline(const VecX& knots, const VecX& values) {
  Eigen::Index n = knots.size();
  if (n < 2 || values.size() != n)
    throw ConfigError("spline needs at least two knots and matching values");
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    if (!(knots[i] < knots[i + 1]))
      throw ConfigError("spline knots must be strictly increasing");
  if (!(knots[0] >= 0.0) || !(knots[n - 1] < 1.0))
    throw ConfigError("spline knots must lie in [0, 1)");
  t_ = knots;
  f_ = values;
  VecX h(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) h[i] = t_[i + 1] - t_[i];
  h[n - 1] = t_[0] + 1.0 - t_[n - 1];
  VecX sub(n), diag(n), sup(n), rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index im = (i + n - 1) % n, ip = (i + 1) % n;
    sub[i] = h[im] / 6.0;
    diag[i] = (h[im] + h[i]) / 3.0;
    sup[i] = h[i] / 6.0;
    rhs[i] = (f_[ip] - f_[i]) / h[i] - (f_[i] - f_[im]) / h[im];
  }
  m_ = solve_cyclic_tridiag(sub, diag, sup, rhs);
}

double PeriodicCubicSpline::operator()(double t) const {
  Eigen::Index n = t_.size();
  double s = t - std::floor(t);  // into [0,1)
  if (s < t_[0]) s += 1.0;       // into [t_0, t_0 + 1)
  const double* begin = t_.data();
  Eigen::Index i = std::upper_bound(begin, begin + n, s) - begin - 1;
  Eigen::Index ip = (i + 1) % n;
  double ti = t_[i];
  double tip = (i + 1 < n) ? t_[i + 1] : t_[0] + 1.0;
  double h = tip - ti;
  double A = (tip - s) / h, B = (s - ti) / h;
  return A * f_[i] + B * f_[ip] +
         ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[ip]) * h * h / 6.0;
}

std::vector<VecX> spline_densify(const MeasurementSet& ms, int P_prime) {
  if (ms.config.R < 8) throw ConfigError("need at least 8 measurement points to densify");
  if (P_prime < 16) throw ConfigError("dense node count too small");
  std::vector<VecX> out;
  for (const auto& block : ms.data) {
    PeriodicCubicSpline sx(ms.params, block.row(0).transpose());
    PeriodicCubicSpline sy(ms.params, block.row(1).transpose());
    VecX dense(2 * P_prime);
    for (int p = 0; p < P_prime; ++p) {
      double t = static_cast<double>(p) / P_prime;
      dense[2 * p] = sx(t);
      dense[2 * p + 1] = sy(t);
    }
    out.push_back(dense);
  }
  return out;
}

FilteredData calderon_filter(const std::vector<VecX>& dense, const BoundaryOperatorSet& ops,
                             const VecX& eval_params) {
  if (ops.K.size() == 0) throw NumericalError("filter requires the double-layer operator");
  FilteredData fd;
  fd.dense = dense;
  Eigen::Index P = ops.bd.size();
  for (const VecX& f : dense) {
    if (f.size() != 2 * P) throw ConfigError("dense sample size does not match the node set");
    VecX filt = -0.5 * f + ops.K * f;
    fd.dense_filtered.push_back(filt);
    VecX fx(P), fy(P);
    for (Eigen::Index p = 0; p < P; ++p) {
      fx[p] = filt[2 * p];
      fy[p] = filt[2 * p + 1];
    }
    PeriodicCubicSpline sx(ops.bd.params, fx), sy(ops.bd.params, fy);
    Eigen::Matrix2Xd Y(2, eval_params.size());
    for (Eigen::Index r = 0; r < eval_params.size(); ++r)
      Y.col(r) = Vec2(sx(eval_params[r]), sy(eval_params[r]));
    fd.Y.push_back(Y);
  }
  return fd;
}

}  // namespace elg

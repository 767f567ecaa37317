#include "elg/sensing.hpp"

#include <cmath>

namespace elg {

SensingMatrix assemble_Pi(const Eigen::Matrix2Xd& points, const InteriorGrid& grid,
                          const KernelConstants& k, double min_separation) {
  SensingMatrix sm;
  sm.h = grid.h;
  sm.points = points;
  sm.R = static_cast<int>(points.cols());
  sm.L = grid.size();
  if (sm.R == 0 || sm.L == 0) throw ConfigError("sensing matrix needs points and a grid");
  double h2 = grid.h * grid.h;
  sm.Pi.resize(2 * sm.R, 5 * sm.L);
  for (Eigen::Index l = 0; l < sm.L; ++l) {
    Vec2 y = grid.points.col(l);
    for (int r = 0; r < sm.R; ++r) {
      Vec2 x = points.col(r);
      if ((x - y).norm() < min_separation)
        throw NumericalError("grid point too close to a measurement point");
      Eigen::Matrix<double, 2, 5> blk = h2 * lambda_block(x, y, k);
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 5; ++q) sm.Pi(p * sm.R + r, q * sm.L + l) = blk(p, q);
    }
  }
  return sm;
}

Preconditioner svd_preconditioner(const SensingMatrix& sm, double theta_scale) {
  Eigen::Index n = sm.Pi.rows();
  MatX B = sm.Pi * sm.Pi.transpose();
  Eigen::SelfAdjointEigenSolver<MatX> eig(B);
  if (eig.info() != Eigen::Success)
    throw NumericalError("eigendecomposition for the preconditioner failed");
  Preconditioner pre;
  pre.sigma.resize(n);
  MatX V(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {  // ascending -> descending
    double ev = std::max(eig.eigenvalues()[n - 1 - i], 0.0);
    pre.sigma[i] = std::sqrt(ev);
    V.col(i) = eig.eigenvectors().col(n - 1 - i);
  }
  pre.theta = theta_scale * pre.sigma[0] * pre.sigma[0];
  pre.P.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double denom = std::sqrt(pre.sigma[i] * pre.sigma[i] + pre.theta);
    if (!(denom > 0)) throw NumericalError("preconditioner is singular (zero spectrum)");
    pre.P.row(i) = V.col(i).transpose() / denom;
  }
  return pre;
}

StepTwoMatrix assemble_Pi_tilde(const Eigen::Matrix2Xd& support_points, double h,
                                const std::vector<FieldWeights>& fields,
                                const Eigen::Matrix2Xd& meas_points, const KernelConstants& k) {
  StepTwoMatrix st;
  st.R = static_cast<int>(meas_points.cols());
  st.M = static_cast<int>(fields.size());
  st.Lt = support_points.cols();
  if (st.R == 0 || st.M == 0 || st.Lt == 0)
    throw ConfigError("step-two matrix needs points, fields, and a support");
  double h2 = h * h;
  st.Pi.resize(2 * st.R * st.M, 5 * st.Lt);
  for (int m = 0; m < st.M; ++m) {
    const FieldWeights& fw = fields[m];
    if (fw.div.size() != st.Lt || static_cast<Eigen::Index>(fw.strain.size()) != st.Lt)
      throw ConfigError("field weights do not match the support size");
    for (Eigen::Index l = 0; l < st.Lt; ++l) {
      Vec2 y = support_points.col(l);
      // diag(div, 2 vec E) in the kernel-coordinate order.
      double w[5] = {fw.div[l], 2 * fw.strain[l](0, 0), 2 * fw.strain[l](1, 0),
                     2 * fw.strain[l](0, 1), 2 * fw.strain[l](1, 1)};
      for (int r = 0; r < st.R; ++r) {
        Eigen::Matrix<double, 2, 5> blk = h2 * lambda_block(meas_points.col(r), y, k);
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 5; ++q)
            st.Pi(m * 2 * st.R + p * st.R + r, q * st.Lt + l) = blk(p, q) * w[q];
      }
    }
  }
  st.col_norms.resize(5 * st.Lt);
  for (Eigen::Index c = 0; c < st.Pi.cols(); ++c) {
    double nrm = st.Pi.col(c).norm();
    st.col_norms[c] = nrm;
    if (nrm > 0.0)
      st.Pi.col(c) /= nrm;
    else
      st.zero_columns.push_back(c);
  }
  return st;
}

}  // namespace elg

#include "elg/msbl.hpp"

#include <cmath>

namespace elg {

MsblState msbl_solve(const MatX& Pi, const MatX& Y, const MsblOptions& opts) {
  Eigen::Index rows = Pi.rows(), cols = Pi.cols();
  int B = opts.blocks;
  if (cols % B != 0) throw ConfigError("column count is not a multiple of the block count");
  Eigen::Index L = cols / B;
  Eigen::Index M = Y.cols();
  if (Y.rows() != rows) throw ConfigError("data rows do not match the sensing matrix");

  MsblState st;
  double sigma2 = Eigen::SelfAdjointEigenSolver<MatX>(Pi * Pi.transpose())
                      .eigenvalues()
                      .maxCoeff();
  st.zeta = 10.0 * sigma2;
  st.g = VecX::Ones(cols);
  std::vector<bool> pruned(L, false);

  for (int it = 0; it < opts.iter_max; ++it) {
    st.iterations = it + 1;
    MatX A = st.zeta * MatX::Identity(rows, rows);
    A.noalias() += Pi * st.g.asDiagonal() * Pi.transpose();
    Eigen::LLT<MatX> llt(A);
    if (llt.info() != Eigen::Success) {
      // zeta collapsed onto a low-rank covariance: the noiseless limit. Keep the
      // previous iterate; failing on the very first pass is a genuine breakdown.
      if (it == 0) throw NumericalError("covariance factorization failed at iteration 1");
      st.iterations = it;
      st.zeta = 0.0;
      break;
    }
    st.X.noalias() = st.g.asDiagonal() * (Pi.transpose() * llt.solve(Y));
    MatX W = llt.solve(Pi);  // A^{-1} Pi, shared by the denominator and the trace update
    if (!st.X.allFinite()) throw NumericalError("non-finite iterate in the sparse recovery");

    for (Eigen::Index l = 0; l < L; ++l) {
      if (pruned[l]) {
        for (int q = 0; q < B; ++q) st.g[l + q * L] = 0.0;
        continue;
      }
      double num = 0.0, den = 0.0;
      for (int q = 0; q < B; ++q) {
        Eigen::Index c = l + q * L;
        num += st.X.row(c).squaredNorm();
        den += Pi.col(c).dot(W.col(c));
      }
      double gl = (den * M > 1e-30) ? std::sqrt(num / (M * den)) : 0.0;
      for (int q = 0; q < B; ++q) st.g[l + q * L] = gl;
    }
    double gmax = st.g.maxCoeff();
    if (gmax <= 0.0) break;  // everything vanished; X stays zero
    for (Eigen::Index l = 0; l < L; ++l) {
      if (!pruned[l] && st.g[l] / gmax < opts.rho) {
        pruned[l] = true;
        for (int q = 0; q < B; ++q) st.g[l + q * L] = 0.0;
      }
    }
    double res2 = (Y - Pi * st.X).squaredNorm();
    double trF = llt.solve(MatX::Identity(rows, rows)).trace();
    double zeta_prev = st.zeta;
    st.zeta = std::sqrt(res2 / (M * trF));
    // Once the noise estimate stops moving the residual sits at the noise floor
    // and further sweeps only re-distribute it onto ever sparser supports, so
    // continuing past this point erodes the recovered support.
    if (it > 0 && std::isfinite(st.zeta) &&
        std::abs(st.zeta - zeta_prev) < opts.stop_tol * zeta_prev) {
      if (opts.on_iteration) {
        int active = 0;
        for (Eigen::Index l = 0; l < L; ++l) active += !pruned[l];
        opts.on_iteration(it + 1, st.zeta, active, std::sqrt(res2));
      }
      break;
    }
    if (!std::isfinite(st.zeta) || st.zeta <= 0.0) {
      st.zeta = 0.0;  // noiseless fit; further refinement would be singular
      if (opts.on_iteration)
        opts.on_iteration(it + 1, st.zeta, static_cast<int>(L), std::sqrt(res2));
      break;
    }
    if (opts.on_iteration) {
      int active = 0;
      for (Eigen::Index l = 0; l < L; ++l) active += !pruned[l];
      opts.on_iteration(it + 1, st.zeta, active, std::sqrt(res2));
    }
  }
  return st;
}

SupportEstimate identify_support(const MatX& X, Eigen::Index L, double xi, int blocks) {
  if (X.rows() != blocks * L) throw ConfigError("estimate rows do not match blocks * L");
  SupportEstimate se;
  se.xi = xi;
  se.psi.resize(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    double s = 0.0;
    for (int q = 0; q < blocks; ++q) s += X.row(l + q * L).squaredNorm();
    se.psi[l] = std::sqrt(s);
  }
  double pmax = se.psi.maxCoeff();
  if (pmax > 0.0)
    for (Eigen::Index l = 0; l < L; ++l)
      if (se.psi[l] / pmax > xi) se.indices.push_back(l);
  se.empty_flagged = se.indices.empty();
  return se;
}

}  // namespace elg

#include "elg/csalsa.hpp"

#include <cmath>

namespace elg {

VecX soft_threshold(const VecX& s, double tau) {
  return s.unaryExpr([tau](double v) {
    double m = std::abs(v) - tau;
    return m > 0.0 ? (v > 0.0 ? m : -m) : 0.0;
  });
}

VecX project_ball(const VecX& s, const VecX& center, double eta) {
  VecX d = s - center;
  double n = d.norm();
  if (n <= eta) return s;
  return center + (eta / n) * d;
}

CsalsaState csalsa_solve(const MatX& Pi, const VecX& Y, const CsalsaOptions& opts) {
  Eigen::Index n = Pi.cols(), rows = Pi.rows();
  if (Y.size() != rows) throw ConfigError("data size does not match the sensing matrix");
  double zeta = opts.zeta;

  MatX H = (1.0 + zeta * zeta) * MatX::Identity(n, n);
  H.noalias() += Pi.transpose() * Pi;
  Eigen::LLT<MatX> llt(H);
  if (llt.info() != Eigen::Success) {
    H.diagonal().array() += 1e-12;
    llt.compute(H);
    if (llt.info() != Eigen::Success)
      throw NumericalError("normal-equation factorization failed");
  }

  CsalsaState st;
  // Shrinkage scale from the ridge iterate; with the cold start the first Z is zero.
  VecX Zref = llt.solve(Pi.transpose() * Y);
  st.tau = opts.tau_scale * Zref.cwiseAbs().mean();
  st.eta = opts.eta_scale * Y.norm();

  VecX a1 = VecX::Zero(n), b1 = VecX::Zero(n);
  VecX a2 = VecX::Zero(rows), b2 = VecX::Zero(rows);
  st.Z = VecX::Zero(n);
  double prev_cost = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opts.iter_max; ++k) {
    st.iterations = k + 1;
    // The identity part of H belongs to a third splitting pair whose box bounds
    // are infinite; its projection is the identity, so its multiplier stays zero
    // and the pair contributes the previous iterate to the right side.
    VecX r = st.Z + zeta * (a1 + b1) + Pi.transpose() * (a2 + b2);
    st.Z = llt.solve(r);
    if (!st.Z.allFinite()) throw NumericalError("non-finite iterate in the parameter solve");
    VecX v1 = zeta * st.Z - b1;
    a1 = soft_threshold(v1, st.tau);
    VecX v2 = Pi * st.Z - b2;
    a2 = project_ball(v2, Y, st.eta);
    // b <- b + a - zeta Z collapses to a - v since v already carries -b
    b1 = a1 - v1;
    b2 = a2 - v2;

    double res = (Y - Pi * st.Z).norm();
    double cost = zeta * st.Z.lpNorm<1>() + std::max(0.0, res - st.eta - 1e-6);
    st.final_cost = cost;
    st.residual = res;
    if (opts.on_iteration) opts.on_iteration(k + 1, cost, res);
    if (k > 0) {
      double denom = std::abs(cost);
      double change = denom > 0.0 ? std::abs(cost - prev_cost) / denom
                                  : std::abs(cost - prev_cost);
      // the piecewise-linear cost can plateau away from the optimum, so a stop
      // also requires the ball constraint to hold
      if (change < opts.stop_tol && res <= st.eta + 1e-6) {
        st.converged = true;
        break;
      }
    }
    prev_cost = cost;
  }
  return st;
}

ParameterMaps fields_from_Z(const VecX& Z_normalized, const StepTwoMatrix& st, double lambda0,
                            double mu0) {
  Eigen::Index Lt = st.Lt;
  if (Z_normalized.size() != 5 * Lt)
    throw ConfigError("contrast vector does not match the support size");
  ParameterMaps pm;
  pm.Z.resize(5 * Lt);
  for (Eigen::Index c = 0; c < 5 * Lt; ++c)
    pm.Z[c] = st.col_norms[c] > 0.0 ? Z_normalized[c] / st.col_norms[c] : 0.0;
  pm.lambda.resize(Lt);
  pm.mu.resize(Lt);
  for (Eigen::Index l = 0; l < Lt; ++l) {
    pm.lambda[l] = lambda0 - pm.Z[l];
    double sum = 0.0;
    int cnt = 0;
    for (int q = 1; q < 5; ++q) {
      if (st.col_norms[l + q * Lt] > 0.0) {
        sum += pm.Z[l + q * Lt];
        ++cnt;
      }
    }
    pm.mu[l] = mu0 - (cnt > 0 ? sum / cnt : 0.0);
  }
  return pm;
}

}  // namespace elg

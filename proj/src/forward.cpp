#include "elg/forward.hpp"

#include <cmath>
#include <random>

#include "elg/filtering.hpp"

namespace elg {

Vec2 BackgroundField::eval(const Vec2& x) const {
  Vec2 out = kelvin_matrix(x - z, k).col(0);
  out.x() += rigid[0] + rigid[2] * x.y();
  out.y() += rigid[1] - rigid[2] * x.x();
  return out;
}

Vec2 BackgroundField::traction(const Vec2& x, const Vec2& nu) const {
  return traction_kernel(z, x, nu, k).row(0).transpose();
}

namespace {

/// Rigid basis (1,0), (0,1), (x2,-x1) sampled node-major on a boundary.
std::array<VecX, 3> rigid_basis(const DiscretizedBoundary& bd) {
  Eigen::Index P = bd.size();
  std::array<VecX, 3> psi;
  for (auto& v : psi) v.setZero(2 * P);
  for (Eigen::Index p = 0; p < P; ++p) {
    psi[0][2 * p] = 1.0;
    psi[1][2 * p + 1] = 1.0;
    psi[2][2 * p] = bd.points(1, p);
    psi[2][2 * p + 1] = -bd.points(0, p);
  }
  return psi;
}

double weighted_dot(const DiscretizedBoundary& bd, const VecX& f, const VecX& g) {
  double out = 0.0;
  for (Eigen::Index p = 0; p < bd.size(); ++p)
    out += f.segment<2>(2 * p).dot(g.segment<2>(2 * p)) * bd.ds(p);
  return out;
}

/// Removes the discrete rigid-motion component of f on bd.
VecX project_out_rigid(const DiscretizedBoundary& bd, const VecX& f) {
  auto basis = rigid_basis(bd);
  Eigen::Matrix3d G;
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) {
    rhs[i] = weighted_dot(bd, basis[i], f);
    for (int j = 0; j < 3; ++j) G(i, j) = weighted_dot(bd, basis[i], basis[j]);
  }
  Eigen::Vector3d c = G.ldlt().solve(rhs);
  VecX out = f;
  for (int i = 0; i < 3; ++i) out -= c[i] * basis[i];
  return out;
}

/// Single-layer matrix from the nodes of `cols` to off-curve points of `rows`.
MatX cross_single(const DiscretizedBoundary& rows, const DiscretizedBoundary& cols,
                  const KernelConstants& k) {
  MatX out(2 * rows.size(), 2 * cols.size());
  for (Eigen::Index p = 0; p < rows.size(); ++p)
    for (Eigen::Index q = 0; q < cols.size(); ++q)
      out.block<2, 2>(2 * p, 2 * q) =
          kelvin_matrix(rows.points.col(p) - cols.points.col(q), k) * cols.ds(q);
  return out;
}

/// Traction (at the rows' normals) of the single layer over `cols`.
MatX cross_traction(const DiscretizedBoundary& rows, const DiscretizedBoundary& cols,
                    const KernelConstants& k) {
  MatX out(2 * rows.size(), 2 * cols.size());
  for (Eigen::Index p = 0; p < rows.size(); ++p)
    for (Eigen::Index q = 0; q < cols.size(); ++q)
      out.block<2, 2>(2 * p, 2 * q) =
          traction_kernel(cols.points.col(q), rows.points.col(p), rows.normals.col(p), k)
              .transpose() *
          cols.ds(q);
  return out;
}

int scaled_node_count(double len, double len_outer, int P) {
  int n = static_cast<int>(std::lround(P * len / len_outer));
  n = std::max(n, 64);
  if (n % 2) ++n;
  return n;
}

}  // namespace

BackgroundField background_field(const Vec2& z, const DiscretizedBoundary& bd,
                                 const KernelConstants& k) {
  BackgroundField bg{z, Eigen::Vector3d::Zero(), k};
  Eigen::Index P = bd.size();
  VecX trace(2 * P);
  for (Eigen::Index p = 0; p < P; ++p)
    trace.segment<2>(2 * p) = kelvin_matrix(bd.points.col(p) - z, k).col(0);
  auto basis = rigid_basis(bd);
  Eigen::Matrix3d G;
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) {
    rhs[i] = -weighted_dot(bd, basis[i], trace);
    for (int j = 0; j < 3; ++j) G(i, j) = weighted_dot(bd, basis[i], basis[j]);
  }
  bg.rigid = G.ldlt().solve(rhs);
  return bg;
}

FieldSamples solve_transmission(const Phantom& phantom, const SourceConfig& src, int P) {
  if (src.count() == 0) throw ConfigError("at least one excitation source is required");
  FieldSamples fs;
  fs.phantom = phantom;
  fs.sources = src;
  KernelConstants k0 = kernel_constants(phantom.lambda0, phantom.mu0);
  ParamCurve outer = phantom.boundary();
  fs.bd_omega = sample_boundary(outer, P);
  for (const Vec2& z : src.points) {
    double q = z.x() * z.x() / (phantom.semi_a * phantom.semi_a) +
               z.y() * z.y() / (phantom.semi_b * phantom.semi_b);
    if (q <= 1.0) throw ConfigError("excitation source lies inside the specimen");
  }

  double len_outer = fs.bd_omega.length();
  size_t N = phantom.inclusions.size();
  std::vector<bool> active(N);
  for (size_t n = 0; n < N; ++n) {
    const Inclusion& inc = phantom.inclusions[n];
    double len = sample_boundary(inc.curve, 1024).length();
    fs.bd_incl.push_back(sample_boundary(inc.curve, scaled_node_count(len, len_outer, P)));
    active[n] = inc.lambda != phantom.lambda0 || inc.mu != phantom.mu0;
  }

  int M = src.count();
  Eigen::Index Pb = fs.bd_omega.size();
  for (int m = 0; m < M; ++m) {
    fs.background.push_back(background_field(src.points[m], fs.bd_omega, k0));
    VecX Um(2 * Pb), gm(2 * Pb);
    for (Eigen::Index p = 0; p < Pb; ++p) {
      Um.segment<2>(2 * p) = fs.background[m].eval(fs.bd_omega.points.col(p));
      gm.segment<2>(2 * p) =
          fs.background[m].traction(fs.bd_omega.points.col(p), fs.bd_omega.normals.col(p));
    }
    fs.U.push_back(Um);
    fs.g.push_back(gm);
  }

  std::vector<size_t> act;
  for (size_t n = 0; n < N; ++n)
    if (active[n]) act.push_back(n);

  fs.phi.assign(M, std::vector<VecX>(N));
  fs.psi.assign(M, std::vector<VecX>(N));

  BoundaryOperatorSet ops_omega =
      assemble_operators(fs.bd_omega, k0, kAssembleS | kAssembleKstar);

  if (act.empty()) {
    for (int m = 0; m < M; ++m) {
      fs.eta.push_back(VecX::Zero(2 * Pb));
      fs.u.push_back(fs.U[m]);
      fs.du.push_back(VecX::Zero(2 * Pb));
    }
    fs.condition_estimate = 1.0;
    return fs;
  }

  // Unknown layout: [phi_1, psi_1, ..., phi_Na, psi_Na, eta] over active inclusions.
  std::vector<Eigen::Index> off_phi(act.size()), off_psi(act.size());
  Eigen::Index off = 0;
  for (size_t i = 0; i < act.size(); ++i) {
    Eigen::Index sz = 2 * fs.bd_incl[act[i]].size();
    off_phi[i] = off;
    off_psi[i] = off + sz;
    off += 2 * sz;
  }
  Eigen::Index off_eta = off;
  // Three multiplier columns complete the rank-deficient outer traction block:
  // its null space carries the rigid motions, so eta is pinned orthogonal to the
  // rigid traces and the compensating rigid fields vanish at the solution.
  Eigen::Index off_c = off + 2 * Pb;
  Eigen::Index total = off_c + 3;

  MatX A = MatX::Zero(total, total);
  for (size_t i = 0; i < act.size(); ++i) {
    const DiscretizedBoundary& bdn = fs.bd_incl[act[i]];
    const Inclusion& inc = phantom.inclusions[act[i]];
    KernelConstants kn = kernel_constants(inc.lambda, inc.mu);
    Eigen::Index sz = 2 * bdn.size();

    BoundaryOperatorSet in_ops = assemble_operators(bdn, kn, kAssembleS | kAssembleKstar);
    BoundaryOperatorSet out_ops = assemble_operators(bdn, k0, kAssembleS | kAssembleKstar);

    // Continuity of displacement across the interface.
    A.block(off_phi[i], off_phi[i], sz, sz) = in_ops.S;
    A.block(off_phi[i], off_psi[i], sz, sz) = -out_ops.S;
    // Continuity of traction.
    A.block(off_psi[i], off_phi[i], sz, sz) =
        -0.5 * MatX::Identity(sz, sz) + in_ops.Kstar;
    A.block(off_psi[i], off_psi[i], sz, sz) =
        -(0.5 * MatX::Identity(sz, sz) + out_ops.Kstar);
    for (size_t j = 0; j < act.size(); ++j) {
      if (j == i) continue;
      const DiscretizedBoundary& bdj = fs.bd_incl[act[j]];
      A.block(off_phi[i], off_psi[j], sz, 2 * bdj.size()) = -cross_single(bdn, bdj, k0);
      A.block(off_psi[i], off_psi[j], sz, 2 * bdj.size()) = -cross_traction(bdn, bdj, k0);
    }
    A.block(off_phi[i], off_eta, sz, 2 * Pb) = -cross_single(bdn, fs.bd_omega, k0);
    A.block(off_psi[i], off_eta, sz, 2 * Pb) = -cross_traction(bdn, fs.bd_omega, k0);
    // Outer Neumann row.
    A.block(off_eta, off_psi[i], 2 * Pb, sz) = cross_traction(fs.bd_omega, bdn, k0);
  }
  A.block(off_eta, off_eta, 2 * Pb, 2 * Pb) =
      -0.5 * MatX::Identity(2 * Pb, 2 * Pb) + ops_omega.Kstar;
  auto rigid = rigid_basis(fs.bd_omega);
  for (int i = 0; i < 3; ++i) {
    A.block(off_eta, off_c + i, 2 * Pb, 1) = rigid[i];
    for (Eigen::Index p = 0; p < Pb; ++p)
      A.block<1, 2>(off_c + i, off_eta + 2 * p) =
          rigid[i].segment<2>(2 * p).transpose() * fs.bd_omega.ds(p);
  }

  MatX rhs = MatX::Zero(total, M);
  for (int m = 0; m < M; ++m) rhs.block(off_eta, m, 2 * Pb, 1) = fs.g[m];

  Eigen::PartialPivLU<MatX> lu(std::move(A));
  double rc = lu.rcond();
  if (!(rc > 0) || !std::isfinite(rc))
    throw NumericalError("transmission system is numerically singular");
  fs.condition_estimate = 1.0 / rc;
  MatX sol = lu.solve(rhs);
  if (!sol.allFinite()) throw NumericalError("transmission solve produced non-finite values");

  std::vector<MatX> omega_single;  // single layer from each inclusion to the outer nodes
  for (size_t i = 0; i < act.size(); ++i)
    omega_single.push_back(cross_single(fs.bd_omega, fs.bd_incl[act[i]], k0));

  for (int m = 0; m < M; ++m) {
    for (size_t i = 0; i < act.size(); ++i) {
      Eigen::Index sz = 2 * fs.bd_incl[act[i]].size();
      fs.phi[m][act[i]] = sol.block(off_phi[i], m, sz, 1);
      fs.psi[m][act[i]] = sol.block(off_psi[i], m, sz, 1);
    }
    VecX eta = sol.block(off_eta, m, 2 * Pb, 1);
    fs.eta.push_back(eta);
    VecX um = ops_omega.S * eta;
    for (size_t i = 0; i < act.size(); ++i) um += omega_single[i] * fs.psi[m][act[i]];
    fs.u.push_back(um);
    fs.du.push_back(project_out_rigid(fs.bd_omega, um - fs.U[m]));
  }
  return fs;
}

Vec2 FieldSamples::interior_u(int m, int n, const Vec2& x) const {
  if (phi[m][n].size() > 0) {
    KernelConstants kn =
        kernel_constants(phantom.inclusions[n].lambda, phantom.inclusions[n].mu);
    return eval_single_layer(bd_incl[n], phi[m][n], x, kn);
  }
  // Zero-contrast inclusion: the exterior representation extends across it.
  KernelConstants k0 = kernel_constants(phantom.lambda0, phantom.mu0);
  if (eta.empty() || eta[m].isZero(0)) return background[m].eval(x);
  Vec2 out = eval_single_layer(bd_omega, eta[m], x, k0);
  for (size_t j = 0; j < bd_incl.size(); ++j)
    if (psi[m][j].size() > 0) out += eval_single_layer(bd_incl[j], psi[m][j], x, k0);
  return out;
}

double FieldSamples::interior_div_u(int m, int n, const Vec2& x) const {
  if (phi[m][n].size() > 0) {
    KernelConstants kn =
        kernel_constants(phantom.inclusions[n].lambda, phantom.inclusions[n].mu);
    return eval_single_layer_div(bd_incl[n], phi[m][n], x, kn);
  }
  KernelConstants k0 = kernel_constants(phantom.lambda0, phantom.mu0);
  if (eta.empty() || eta[m].isZero(0)) return 0.0;
  double out = eval_single_layer_div(bd_omega, eta[m], x, k0);
  for (size_t j = 0; j < bd_incl.size(); ++j)
    if (psi[m][j].size() > 0) out += eval_single_layer_div(bd_incl[j], psi[m][j], x, k0);
  return out;
}

Mat2 FieldSamples::interior_strain_u(int m, int n, const Vec2& x) const {
  if (phi[m][n].size() > 0) {
    KernelConstants kn =
        kernel_constants(phantom.inclusions[n].lambda, phantom.inclusions[n].mu);
    return eval_single_layer_strain(bd_incl[n], phi[m][n], x, kn);
  }
  KernelConstants k0 = kernel_constants(phantom.lambda0, phantom.mu0);
  if (eta.empty() || eta[m].isZero(0)) return Mat2::Zero();
  Mat2 out = eval_single_layer_strain(bd_omega, eta[m], x, k0);
  for (size_t j = 0; j < bd_incl.size(); ++j)
    if (psi[m][j].size() > 0) out += eval_single_layer_strain(bd_incl[j], psi[m][j], x, k0);
  return out;
}

int FieldSamples::inclusion_at(const Vec2& x) const {
  for (size_t n = 0; n < phantom.inclusions.size(); ++n)
    if (contains(phantom.inclusions[n].curve, x)) return static_cast<int>(n);
  return -1;
}

MeasurementConfig measurement_config(const std::string& id) {
  if (id == "R100") return {id, 100, 1.0};
  if (id == "R32") return {id, 32, 1.0};
  if (id == "R16") return {id, 16, 1.0};
  if (id == "R16p") return {id, 16, 0.75};
  throw ConfigError("unknown measurement config: " + id);
}

VecX measurement_params(const MeasurementConfig& cfg) {
  if (cfg.R < 2) throw ConfigError("measurement config needs at least two points");
  VecX t(cfg.R);
  for (int r = 0; r < cfg.R; ++r) {
    if (cfg.arc >= 1.0)
      t[r] = static_cast<double>(r) / cfg.R;
    else
      t[r] = cfg.arc * r / (cfg.R - 1);
  }
  return t;
}

MeasurementSet measure(const FieldSamples& fs, const std::string& config_id) {
  MeasurementSet ms;
  ms.config = measurement_config(config_id);
  ms.params = measurement_params(ms.config);
  ParamCurve outer = fs.phantom.boundary();
  ms.points.resize(2, ms.config.R);
  for (int r = 0; r < ms.config.R; ++r) ms.points.col(r) = outer.position(ms.params[r]);
  Eigen::Index P = fs.bd_omega.size();
  for (size_t m = 0; m < fs.du.size(); ++m) {
    VecX fx(P), fy(P);
    for (Eigen::Index p = 0; p < P; ++p) {
      fx[p] = fs.du[m][2 * p];
      fy[p] = fs.du[m][2 * p + 1];
    }
    PeriodicCubicSpline sx(fs.bd_omega.params, fx), sy(fs.bd_omega.params, fy);
    Eigen::Matrix2Xd d(2, ms.config.R);
    for (int r = 0; r < ms.config.R; ++r) d.col(r) = Vec2(sx(ms.params[r]), sy(ms.params[r]));
    ms.data.push_back(d);
  }
  return ms;
}

MeasurementSet add_noise(const MeasurementSet& ms, double snr_db, unsigned long long seed) {
  MeasurementSet out = ms;
  out.snr_db = snr_db;
  out.seed = seed;
  if (!std::isfinite(snr_db)) return out;
  int R = ms.config.R;
  for (size_t m = 0; m < out.data.size(); ++m) {
    double sigma =
        out.data[m].norm() * std::pow(10.0, -snr_db / 20.0) / std::sqrt(2.0 * R);
    std::seed_seq sq{static_cast<unsigned long long>(seed), static_cast<unsigned long long>(m)};
    std::mt19937_64 rng(sq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < R; ++r)
      for (int c = 0; c < 2; ++c) out.data[m](c, r) += sigma * gauss(rng);
  }
  return out;
}

}  // namespace elg

#include "elg/internal_field.hpp"

#include <algorithm>
#include <map>

namespace elg {

InternalFieldEstimate estimate_displacement(const MatX& X, const SupportEstimate& sup,
                                            const InteriorGrid& grid,
                                            const std::vector<BackgroundField>& background,
                                            const std::vector<VecX>& dense_du,
                                            const BoundaryOperatorSet& ops) {
  if (background.size() != dense_du.size())
    throw ConfigError("one dense boundary trace per excitation is required");
  Eigen::Index L = grid.size();
  if (X.rows() != 5 * L) throw ConfigError("step-one estimate does not match the grid");

  InternalFieldEstimate est;
  est.support = sup.indices;
  std::map<Eigen::Index, bool> halo;  // index -> is clipped neighbor only
  for (Eigen::Index l : sup.indices) halo[l] = false;
  for (Eigen::Index l : sup.indices) {
    int i = grid.cell_i[l], j = grid.cell_j[l];
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      int idx = grid.index_of(i + di[d], j + dj[d]);
      if (idx < 0)
        ++est.clipped_halo;
      else
        halo.emplace(idx, true);
    }
  }
  for (const auto& [idx, extra] : halo) est.halo.push_back(idx);

  size_t M = background.size();
  double h2 = grid.h * grid.h;
  for (size_t m = 0; m < M; ++m) {
    Eigen::Matrix2Xd um(2, static_cast<Eigen::Index>(est.halo.size()));
    for (size_t hpos = 0; hpos < est.halo.size(); ++hpos) {
      Eigen::Index gl = est.halo[hpos];
      Vec2 x = grid.points.col(gl);
      Vec2 val = background[m].eval(x) + eval_double_layer(ops.bd, dense_du[m], x, ops.k);
      for (Eigen::Index sl : sup.indices) {
        if (sl == gl) continue;  // self cell: odd kernel, midpoint value dropped
        Eigen::Matrix<double, 2, 5> blk = lambda_block(x, grid.points.col(sl), ops.k);
        Eigen::Matrix<double, 5, 1> xv;
        for (int q = 0; q < 5; ++q) xv[q] = X(sl + q * L, static_cast<Eigen::Index>(m));
        val -= h2 * blk * xv;
      }
      um.col(static_cast<Eigen::Index>(hpos)) = val;
    }
    est.u.push_back(um);
  }
  return est;
}

void div_and_strain(InternalFieldEstimate& est, const InteriorGrid& grid) {
  std::map<Eigen::Index, Eigen::Index> pos;  // grid index -> column in est.u
  for (size_t i = 0; i < est.halo.size(); ++i)
    pos[est.halo[i]] = static_cast<Eigen::Index>(i);
  double h = grid.h;
  size_t M = est.u.size();
  est.div.assign(M, VecX::Zero(static_cast<Eigen::Index>(est.support.size())));
  est.strain.assign(M, std::vector<Mat2>(est.support.size(), Mat2::Zero()));
  est.isolated_points = 0;

  for (size_t s = 0; s < est.support.size(); ++s) {
    Eigen::Index gl = est.support[s];
    int ci = grid.cell_i[gl], cj = grid.cell_j[gl];
    // For each axis, pick central, then one-sided second order, then first order.
    struct Stencil {
      Eigen::Index idx[3];
      double w[3];
      int n = 0;
    };
    bool isolated = false;
    Stencil axis[2];
    for (int ax = 0; ax < 2; ++ax) {
      auto at = [&](int step) {
        int idx = ax == 0 ? grid.index_of(ci + step, cj) : grid.index_of(ci, cj + step);
        return idx < 0 ? pos.end() : pos.find(idx);
      };
      auto plus = at(1), minus = at(-1), plus2 = at(2), minus2 = at(-2);
      auto self = pos.find(gl);
      Stencil& st = axis[ax];
      if (plus != pos.end() && minus != pos.end()) {
        st = {{plus->second, minus->second, 0}, {0.5 / h, -0.5 / h, 0}, 2};
      } else if (plus != pos.end() && plus2 != pos.end()) {
        st = {{self->second, plus->second, plus2->second}, {-1.5 / h, 2.0 / h, -0.5 / h}, 3};
      } else if (minus != pos.end() && minus2 != pos.end()) {
        st = {{self->second, minus->second, minus2->second}, {1.5 / h, -2.0 / h, 0.5 / h}, 3};
      } else if (plus != pos.end()) {
        st = {{plus->second, self->second, 0}, {1.0 / h, -1.0 / h, 0}, 2};
      } else if (minus != pos.end()) {
        st = {{self->second, minus->second, 0}, {1.0 / h, -1.0 / h, 0}, 2};
      } else {
        st.n = 0;
        isolated = true;
      }
    }
    if (isolated) ++est.isolated_points;
    for (size_t m = 0; m < M; ++m) {
      Mat2 grad = Mat2::Zero();  // grad(j, i) = d u_j / d x_i
      for (int ax = 0; ax < 2; ++ax)
        for (int t = 0; t < axis[ax].n; ++t)
          grad.col(ax) += axis[ax].w[t] * est.u[m].col(axis[ax].idx[t]);
      Mat2 E = 0.5 * (grad + grad.transpose());
      est.strain[m][s] = E;
      est.div[m][static_cast<Eigen::Index>(s)] = E.trace();
    }
  }
}

}  // namespace elg

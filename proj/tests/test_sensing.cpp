#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "elg/sensing.hpp"

using namespace elg;

namespace {

Eigen::Matrix2Xd boundary_points(int R) {
  Eigen::Matrix2Xd pts(2, R);
  for (int r = 0; r < R; ++r) {
    double t = 2.0 * std::numbers::pi * r / R;
    pts.col(r) = Vec2(10.0 * std::cos(t), 7.0 * std::sin(t));
  }
  return pts;
}

}  // namespace

TEST_CASE("step-one matrix entries follow the block layout") {
  Phantom ph = make_phantom("sparse-disks");
  InteriorGrid grid = interior_grid(ph, 1.0);
  KernelConstants k = kernel_constants(1.0, 1.0);
  Eigen::Matrix2Xd pts = boundary_points(6);
  SensingMatrix sm = assemble_Pi(pts, grid, k);
  REQUIRE(sm.Pi.rows() == 12);
  REQUIRE(sm.Pi.cols() == 5 * grid.size());
  double h2 = grid.h * grid.h;
  for (Eigen::Index l = 0; l < grid.size(); l += 37) {
    for (int r = 0; r < 6; ++r) {
      Eigen::Matrix<double, 2, 5> blk = h2 * lambda_block(pts.col(r), grid.points.col(l), k);
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 5; ++q)
          CHECK(sm.Pi(p * sm.R + r, q * sm.L + l) == blk(p, q));
    }
  }
}

TEST_CASE("measurement points too close to the grid are rejected") {
  Phantom ph = make_phantom("sparse-disks");
  InteriorGrid grid = interior_grid(ph, 1.0);
  KernelConstants k = kernel_constants(1.0, 1.0);
  Eigen::Matrix2Xd pts(2, 1);
  pts.col(0) = grid.points.col(0) + Vec2(0.01, 0.0);
  CHECK_THROWS_AS(assemble_Pi(pts, grid, k), NumericalError);
  // a generous separation makes even boundary points fail
  CHECK_THROWS_AS(assemble_Pi(boundary_points(4), grid, k, 50.0), NumericalError);
}

TEST_CASE("the preconditioner whitens the sensing operator") {
  Phantom ph = make_phantom("sparse-disks");
  InteriorGrid grid = interior_grid(ph, 1.0);
  KernelConstants k = kernel_constants(1.0, 1.0);
  SensingMatrix sm = assemble_Pi(boundary_points(8), grid, k);
  Preconditioner pre = svd_preconditioner(sm, 1e-2);
  REQUIRE(pre.sigma.size() == 16);
  for (Eigen::Index i = 1; i < pre.sigma.size(); ++i) CHECK(pre.sigma[i] <= pre.sigma[i - 1]);
  CHECK(pre.theta == doctest::Approx(1e-2 * pre.sigma[0] * pre.sigma[0]).epsilon(1e-12));
  MatX G = (pre.P * sm.Pi) * (pre.P * sm.Pi).transpose();
  for (Eigen::Index i = 0; i < 16; ++i) {
    double expect = pre.sigma[i] * pre.sigma[i] / (pre.sigma[i] * pre.sigma[i] + pre.theta);
    CHECK(G(i, i) == doctest::Approx(expect).epsilon(1e-8));
    for (Eigen::Index j = 0; j < i; ++j) CHECK(std::abs(G(i, j)) <= 1e-8);
  }
}

TEST_CASE("step-two matrix weights, normalization, and zero columns") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index Lt = 4;
  const int M = 2, R = 5;
  Eigen::Matrix2Xd sup(2, Lt);
  sup << -3.0, -1.0, 1.0, 3.0, 0.2, -0.4, 0.3, 0.1;
  Eigen::Matrix2Xd pts = boundary_points(R);
  std::vector<FieldWeights> fields(M);
  for (int m = 0; m < M; ++m) {
    fields[m].div.resize(Lt);
    fields[m].strain.resize(Lt);
    for (Eigen::Index l = 0; l < Lt; ++l) {
      fields[m].div[l] = gauss(rng);
      Mat2 A;
      A << gauss(rng), gauss(rng), gauss(rng), gauss(rng);
      fields[m].strain[l] = 0.5 * (A + A.transpose());
    }
  }
  // zero out one support point entirely: its five columns must come back flagged
  fields[0].div[2] = 0.0;
  fields[0].strain[2].setZero();
  fields[1].div[2] = 0.0;
  fields[1].strain[2].setZero();

  KernelConstants k = kernel_constants(1.0, 1.0);
  const double h = 1.0 / 3.0;
  StepTwoMatrix st = assemble_Pi_tilde(sup, h, fields, pts, k);
  REQUIRE(st.Pi.rows() == 2 * R * M);
  REQUIRE(st.Pi.cols() == 5 * Lt);
  REQUIRE(st.zero_columns.size() == 5);
  for (size_t i = 0; i < 5; ++i) CHECK(st.zero_columns[i] == Eigen::Index(2 + i * Lt));

  for (Eigen::Index c = 0; c < st.Pi.cols(); ++c) {
    if (st.col_norms[c] > 0.0)
      CHECK(st.Pi.col(c).norm() == doctest::Approx(1.0).epsilon(1e-12));
    else
      CHECK(st.Pi.col(c).norm() == 0.0);
  }

  // undo the normalization and compare raw entries against the kernel blocks
  for (Eigen::Index l = 0; l < Lt; ++l) {
    if (l == 2) continue;
    for (int m = 0; m < M; ++m) {
      double w[5] = {fields[m].div[l], 2 * fields[m].strain[l](0, 0),
                     2 * fields[m].strain[l](1, 0), 2 * fields[m].strain[l](0, 1),
                     2 * fields[m].strain[l](1, 1)};
      for (int r = 0; r < R; ++r) {
        Eigen::Matrix<double, 2, 5> blk = h * h * lambda_block(pts.col(r), sup.col(l), k);
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 5; ++q) {
            Eigen::Index col = q * Lt + l;
            double raw = st.Pi(m * 2 * R + p * R + r, col) * st.col_norms[col];
            CHECK(raw == doctest::Approx(blk(p, q) * w[q]).epsilon(1e-12));
          }
      }
    }
  }
}

TEST_CASE("step-two matrix validates its inputs") {
  KernelConstants k = kernel_constants(1.0, 1.0);
  Eigen::Matrix2Xd sup(2, 2), pts = boundary_points(3);
  sup.setZero();
  std::vector<FieldWeights> fields(1);
  fields[0].div = VecX::Ones(1);  // wrong size
  fields[0].strain.assign(1, Mat2::Zero());
  CHECK_THROWS_AS(assemble_Pi_tilde(sup, 0.5, fields, pts, k), ConfigError);
  CHECK_THROWS_AS(assemble_Pi_tilde(sup, 0.5, {}, pts, k), ConfigError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "elg/forward.hpp"

using namespace elg;

namespace {

double rigid_dot(const DiscretizedBoundary& bd, const VecX& f, int which) {
  double out = 0.0;
  for (Eigen::Index p = 0; p < bd.size(); ++p) {
    Vec2 x = bd.points.col(p);
    Vec2 r = which == 0 ? Vec2(1, 0) : which == 1 ? Vec2(0, 1) : Vec2(x.y(), -x.x());
    out += f.segment<2>(2 * p).dot(r) * bd.ds(p);
  }
  return out;
}

Phantom uniform_disks(double lambda, double mu) {
  Phantom ph = make_phantom("sparse-disks");
  for (Inclusion& inc : ph.inclusions) {
    inc.lambda = lambda;
    inc.mu = mu;
  }
  return ph;
}

}  // namespace

TEST_CASE("measurement configurations") {
  MeasurementConfig full = measurement_config("R100");
  CHECK(full.R == 100);
  CHECK(full.arc == 1.0);
  VecX t = measurement_params(full);
  CHECK(t.size() == 100);
  CHECK(t[7] == doctest::Approx(0.07).epsilon(1e-14));

  MeasurementConfig part = measurement_config("R16p");
  CHECK(part.R == 16);
  CHECK(part.arc == doctest::Approx(0.75));
  VecX tp = measurement_params(part);
  CHECK(tp[0] == 0.0);
  CHECK(tp[15] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(tp[1] == doctest::Approx(0.75 / 15.0).epsilon(1e-14));

  CHECK_THROWS_AS(measurement_config("R7"), ConfigError);
}

TEST_CASE("background trace is orthogonal to the rigid motions") {
  DiscretizedBoundary bd = sample_boundary(make_ellipse(10.0, 7.0), 128);
  KernelConstants k = kernel_constants(1.0, 1.0);
  BackgroundField bg = background_field(Vec2(12.0, 11.0), bd, k);
  VecX trace(2 * bd.size());
  for (Eigen::Index p = 0; p < bd.size(); ++p)
    trace.segment<2>(2 * p) = bg.eval(bd.points.col(p));
  for (int which = 0; which < 3; ++which)
    CHECK(std::abs(rigid_dot(bd, trace, which)) <= 1e-10 * trace.norm());
}

TEST_CASE("background traction matches finite differences of the field") {
  DiscretizedBoundary bd = sample_boundary(make_ellipse(10.0, 7.0), 64);
  KernelConstants k = kernel_constants(1.0, 1.0);
  BackgroundField bg = background_field(Vec2(-50.0, 0.0), bd, k);
  const double eps = 1e-6;
  for (Eigen::Index p = 0; p < bd.size(); p += 11) {
    Vec2 x = bd.points.col(p), nu = bd.normals.col(p);
    Mat2 grad;
    for (int d = 0; d < 2; ++d) {
      Vec2 dx = Vec2::Zero();
      dx[d] = eps;
      grad.row(d) = ((bg.eval(x + dx) - bg.eval(x - dx)) / (2 * eps)).transpose();
    }
    Mat2 E = 0.5 * (grad + grad.transpose());
    Vec2 fd = k.lambda0 * grad.trace() * nu + 2.0 * k.mu0 * E * nu;
    CHECK((fd - bg.traction(x, nu)).norm() <= 1e-5 * fd.norm());
  }
}

TEST_CASE("sources must lie outside the specimen") {
  Phantom ph = make_phantom("sparse-disks");
  CHECK_THROWS_AS(solve_transmission(ph, {{Vec2(0.0, 0.0)}}, 64), ConfigError);
  CHECK_THROWS_AS(solve_transmission(ph, {{Vec2(9.0, 1.0)}}, 64), ConfigError);
  CHECK_THROWS_AS(solve_transmission(ph, {{}}, 64), ConfigError);
}

TEST_CASE("zero contrast reproduces the background exactly") {
  Phantom ph = uniform_disks(1.0, 1.0);
  SourceConfig src{{Vec2(12, 11), Vec2(-50, 0)}};
  FieldSamples fs = solve_transmission(ph, src, 64);
  CHECK(fs.condition_estimate == 1.0);
  for (int m = 0; m < 2; ++m) {
    CHECK((fs.u[m] - fs.U[m]).norm() <= 1e-6 * fs.U[m].norm());
    CHECK(fs.du[m].norm() <= 1e-6 * fs.U[m].norm());
    // the interior field inside an inactive inclusion falls back to the background
    Vec2 x(0.1, 0.2);
    int n = fs.inclusion_at(x);
    REQUIRE(n == 1);
    CHECK((fs.interior_u(m, n, x) - fs.background[m].eval(x)).norm() <= 1e-12);
  }
}

TEST_CASE("transmission solve: boundary data, orthogonality, and stability") {
  Phantom ph = make_phantom("sparse-disks");
  SourceConfig src{{Vec2(12, 11), Vec2(9, -11)}};
  FieldSamples fs = solve_transmission(ph, src, 128);
  CHECK(fs.condition_estimate > 1.0);
  CHECK(fs.condition_estimate < 1e12);
  for (int m = 0; m < 2; ++m) {
    // the imposed traction is that of the point excitation
    for (Eigen::Index p = 0; p < fs.bd_omega.size(); p += 17) {
      Vec2 g = fs.background[m].traction(fs.bd_omega.points.col(p), fs.bd_omega.normals.col(p));
      CHECK((fs.g[m].segment<2>(2 * p) - g).norm() <= 1e-12 * g.norm());
    }
    // the scattered trace carries no rigid component
    for (int which = 0; which < 3; ++which)
      CHECK(std::abs(rigid_dot(fs.bd_omega, fs.du[m], which)) <= 1e-9 * (1 + fs.du[m].norm()));
    CHECK(fs.du[m].norm() > 0.0);
  }
}

TEST_CASE("boundary data self-converges under node refinement") {
  Phantom ph = make_phantom("sparse-disks");
  SourceConfig src{{Vec2(12, 11)}};
  FieldSamples coarse = solve_transmission(ph, src, 128);
  FieldSamples fine = solve_transmission(ph, src, 256);
  MeasurementSet mc = measure(coarse, "R16");
  MeasurementSet mf = measure(fine, "R16");
  double num = 0.0, den = 0.0;
  for (int r = 0; r < 16; ++r) {
    num += (mc.data[0].col(r) - mf.data[0].col(r)).squaredNorm();
    den += mf.data[0].col(r).squaredNorm();
  }
  CHECK(std::sqrt(num / den) <= 2e-3);
}

TEST_CASE("measured data equals nodal data when the points coincide with nodes") {
  Phantom ph = make_phantom("sparse-disks");
  SourceConfig src{{Vec2(12, 11)}};
  FieldSamples fs = solve_transmission(ph, src, 100);
  MeasurementSet ms = measure(fs, "R100");
  REQUIRE(ms.data.size() == 1);
  for (int r = 0; r < 100; ++r) {
    CHECK(ms.data[0](0, r) == doctest::Approx(fs.du[0][2 * r]).epsilon(1e-10));
    CHECK(ms.data[0](1, r) == doctest::Approx(fs.du[0][2 * r + 1]).epsilon(1e-10));
  }
}

TEST_CASE("noise is deterministic in the seed and scaled by the target ratio") {
  Phantom ph = make_phantom("sparse-disks");
  SourceConfig src{{Vec2(12, 11), Vec2(-50, 0)}};
  FieldSamples fs = solve_transmission(ph, src, 128);
  MeasurementSet clean = measure(fs, "R100");
  MeasurementSet a = add_noise(clean, 40.0, 7);
  MeasurementSet b = add_noise(clean, 40.0, 7);
  MeasurementSet c = add_noise(clean, 40.0, 8);
  for (int m = 0; m < 2; ++m) {
    CHECK((a.data[m] - b.data[m]).norm() == 0.0);
    CHECK((a.data[m] - c.data[m]).norm() > 0.0);
    double noise = (a.data[m] - clean.data[m]).norm();
    double expect = clean.data[m].norm() * std::pow(10.0, -40.0 / 20.0);
    CHECK(noise >= 0.75 * expect);
    CHECK(noise <= 1.3 * expect);
  }
  CHECK(a.snr_db == 40.0);
  CHECK(a.seed == 7);
}

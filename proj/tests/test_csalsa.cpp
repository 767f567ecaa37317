#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "elg/csalsa.hpp"

using namespace elg;

TEST_CASE("soft threshold") {
  VecX s(4);
  s << 3.0, -2.0, 0.5, 0.0;
  VecX out = soft_threshold(s, 1.0);
  CHECK(out[0] == doctest::Approx(2.0));
  CHECK(out[1] == doctest::Approx(-1.0));
  CHECK(out[2] == 0.0);
  CHECK(out[3] == 0.0);
}

TEST_CASE("ball projection") {
  VecX c(2), inside(2), outside(2);
  c << 1.0, 1.0;
  inside << 1.2, 0.9;
  outside << 4.0, 1.0;
  CHECK((project_ball(inside, c, 0.5) - inside).norm() == 0.0);
  VecX pr = project_ball(outside, c, 0.5);
  CHECK((pr - c).norm() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pr[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pr[0] == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("identity operator, loose ball: zero is optimal") {
  MatX Pi = MatX::Identity(2, 2);
  VecX Y(2);
  Y << 1.0, 0.0;
  CsalsaOptions opts;
  opts.eta_scale = 2.0;  // the ball contains the origin
  opts.stop_tol = 1e-8;
  CsalsaState st = csalsa_solve(Pi, Y, opts);
  CHECK(st.eta == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(st.Z.norm() <= 1e-3);
  CHECK(st.residual <= st.eta + 1e-6);
}

TEST_CASE("identity operator, tight ball: the solution sits on the boundary") {
  MatX Pi = MatX::Identity(2, 2);
  VecX Y(2);
  Y << 1.0, 0.0;
  CsalsaOptions opts;
  opts.eta_scale = 0.5;
  opts.stop_tol = 1e-8;
  CsalsaState st = csalsa_solve(Pi, Y, opts);
  CHECK(st.Z[0] == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(std::abs(st.Z[1]) <= 1e-3);
  CHECK(st.residual <= st.eta + 1e-6);
}

TEST_CASE("feasibility and convergence on a random overdetermined system") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  MatX Pi(24, 8);
  for (Eigen::Index i = 0; i < Pi.size(); ++i) Pi(i) = g(rng);
  for (Eigen::Index c = 0; c < 8; ++c) Pi.col(c).normalize();
  VecX z0 = VecX::Zero(8);
  z0[1] = 2.0;
  z0[5] = -1.5;
  VecX Y = Pi * z0;
  CsalsaOptions opts;
  opts.zeta = 0.5;
  std::vector<double> costs;
  opts.on_iteration = [&](int, double c, double) { costs.push_back(c); };
  CsalsaState st = csalsa_solve(Pi, Y, opts);
  CHECK(st.converged);
  CHECK(st.residual <= st.eta + 1e-6);
  // the solver should keep most of the energy on the planted coordinates
  double planted = std::abs(st.Z[1]) + std::abs(st.Z[5]);
  CHECK(planted >= 0.5 * st.Z.lpNorm<1>());
  REQUIRE(costs.size() >= 2);
  CHECK(costs.back() <= costs.front());
}

TEST_CASE("solver validates the data size") {
  CHECK_THROWS_AS(csalsa_solve(MatX::Identity(3, 3), VecX::Zero(2)), ConfigError);
}

TEST_CASE("parameter maps divide by the saved column norms") {
  StepTwoMatrix st;
  st.Lt = 2;
  st.col_norms.resize(10);
  st.col_norms << 2.0, 4.0, 1.0, 1.0, 0.5, 1.0, 1.0, 0.0, 2.0, 1.0;
  // column 7 = (q=3, l=1) has zero norm and must be skipped in the mu mean
  VecX Zn(10);
  Zn << 1.0, 2.0, 0.4, 0.4, 0.2, 0.2, 0.3, 9.9, 0.8, 0.5;
  ParameterMaps pm = fields_from_Z(Zn, st, 1.0, 1.0);
  CHECK(pm.Z[0] == doctest::Approx(0.5));
  CHECK(pm.Z[7] == 0.0);
  CHECK(pm.lambda[0] == doctest::Approx(1.0 - 0.5));
  CHECK(pm.lambda[1] == doctest::Approx(1.0 - 0.5));
  // l = 0: mean of Zn[2]/1, Zn[4]/0.5, Zn[6]/1, Zn[8]/2 = (0.4 + 0.4 + 0.3 + 0.4)/4
  CHECK(pm.mu[0] == doctest::Approx(1.0 - 0.375));
  // l = 1: q = 3 excluded, mean of 0.4, 0.2, 0.5 over three entries
  CHECK(pm.mu[1] == doctest::Approx(1.0 - (0.4 + 0.2 + 0.5) / 3.0));
  CHECK_THROWS_AS(fields_from_Z(VecX::Zero(7), st, 1.0, 1.0), ConfigError);
}

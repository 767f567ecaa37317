#include "elg/geometry.hpp"

#include <cmath>
#include <numbers>

namespace elg {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec2 rotate(const Vec2& v, double ca, double sa) {
  return Vec2(ca * v.x() - sa * v.y(), sa * v.x() + ca * v.y());
}
}  // namespace

ParamCurve make_ellipse(double a, double b, const Vec2& center) {
  ParamCurve c;
  c.position = [=](double t) {
    return Vec2(center.x() + a * std::cos(kTwoPi * t), center.y() + b * std::sin(kTwoPi * t));
  };
  c.derivative = [=](double t) {
    return Vec2(-kTwoPi * a * std::sin(kTwoPi * t), kTwoPi * b * std::cos(kTwoPi * t));
  };
  return c;
}

ParamCurve make_circle(double radius, const Vec2& center) {
  return make_ellipse(radius, radius, center);
}

ParamCurve make_kite(double scale, const Vec2& center) {
  ParamCurve c;
  c.position = [=](double t) {
    double u = kTwoPi * t;
    return Vec2(center.x() + scale * (std::cos(u) + 0.65 * std::cos(2 * u) - 0.65),
                center.y() + scale * 1.5 * std::sin(u));
  };
  c.derivative = [=](double t) {
    double u = kTwoPi * t;
    return Vec2(scale * kTwoPi * (-std::sin(u) - 1.3 * std::sin(2 * u)),
                scale * kTwoPi * 1.5 * std::cos(u));
  };
  return c;
}

ParamCurve make_stadium(double len, double rho, const Vec2& center, double angle) {
  double per = 4.0 * len + kTwoPi * rho;
  double ca = std::cos(angle), sa = std::sin(angle);
  // Arc-length parametrization, CCW: top edge leftward, left cap, bottom edge, right cap.
  auto local = [=](double t, Vec2& pos, Vec2& tan) {
    double s = std::fmod(t, 1.0);
    if (s < 0) s += 1.0;
    s *= per;
    if (s < 2 * len) {
      pos = Vec2(len - s, rho);
      tan = Vec2(-1, 0);
    } else if (s < 2 * len + std::numbers::pi * rho) {
      double ph = (s - 2 * len) / rho;
      pos = Vec2(-len - rho * std::sin(ph), rho * std::cos(ph));
      tan = Vec2(-std::cos(ph), -std::sin(ph));
    } else if (s < 4 * len + std::numbers::pi * rho) {
      pos = Vec2(-len + (s - 2 * len - std::numbers::pi * rho), -rho);
      tan = Vec2(1, 0);
    } else {
      double ph = (s - 4 * len - std::numbers::pi * rho) / rho;
      pos = Vec2(len + rho * std::sin(ph), -rho * std::cos(ph));
      tan = Vec2(std::cos(ph), std::sin(ph));
    }
  };
  ParamCurve c;
  c.position = [=](double t) {
    Vec2 p, d;
    local(t, p, d);
    return Vec2(center + rotate(p, ca, sa));
  };
  c.derivative = [=](double t) {
    Vec2 p, d;
    local(t, p, d);
    return Vec2(per * rotate(d, ca, sa));
  };
  return c;
}

ParamCurve make_arc_band(double rad, double rho, const Vec2& center, double t0, double t1) {
  double dth = t1 - t0;
  double louter = (rad + rho) * dth;
  double lcap = std::numbers::pi * rho;
  double linner = (rad - rho) * dth;
  double per = louter + 2 * lcap + linner;
  auto er = [](double th) { return Vec2(std::cos(th), std::sin(th)); };
  auto et = [](double th) { return Vec2(-std::sin(th), std::cos(th)); };
  auto local = [=](double t, Vec2& pos, Vec2& tan) {
    double s = std::fmod(t, 1.0);
    if (s < 0) s += 1.0;
    s *= per;
    if (s < louter) {  // outer arc, increasing angle
      double th = t0 + s / (rad + rho);
      pos = center + (rad + rho) * er(th);
      tan = et(th);
    } else if (s < louter + lcap) {  // cap at t1, outer to inner
      double ph = (s - louter) / rho;
      pos = center + rad * er(t1) + rho * (std::cos(ph) * er(t1) + std::sin(ph) * et(t1));
      tan = -std::sin(ph) * er(t1) + std::cos(ph) * et(t1);
    } else if (s < louter + lcap + linner) {  // inner arc, decreasing angle
      double th = t1 - (s - louter - lcap) / (rad - rho);
      pos = center + (rad - rho) * er(th);
      tan = -et(th);
    } else {  // cap at t0, inner to outer
      double ph = (s - louter - lcap - linner) / rho;
      pos = center + rad * er(t0) - rho * (std::cos(ph) * er(t0) + std::sin(ph) * et(t0));
      tan = std::sin(ph) * er(t0) - std::cos(ph) * et(t0);
    }
  };
  ParamCurve c;
  c.position = [=](double t) {
    Vec2 p, d;
    local(t, p, d);
    return p;
  };
  c.derivative = [=](double t) {
    Vec2 p, d;
    local(t, p, d);
    return Vec2(per * d);
  };
  return c;
}

namespace {

void check_convexity(double lambda, double mu, const std::string& what) {
  if (!(mu > 0.0) || !(2.0 * lambda + 2.0 * mu > 0.0))
    throw ConfigError(what + " violates strong convexity (mu > 0, 2 lambda + 2 mu > 0)");
}

double curve_to_curve_distance(const ParamCurve& c1, const ParamCurve& c2, int samples) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    Vec2 p = c1.position(static_cast<double>(i) / samples);
    best = std::min(best, distance_to_curve(c2, p, samples));
  }
  return best;
}

}  // namespace

void validate_phantom(const Phantom& phantom) {
  check_convexity(phantom.lambda0, phantom.mu0, "background");
  ParamCurve outer = phantom.boundary();
  const int ns = 512;
  for (size_t n = 0; n < phantom.inclusions.size(); ++n) {
    const Inclusion& inc = phantom.inclusions[n];
    check_convexity(inc.lambda, inc.mu, "inclusion " + std::to_string(n + 1) + " (H3)");
    if (!((phantom.lambda0 - inc.lambda) * (phantom.mu0 - inc.mu) > 0.0))
      throw ConfigError("inclusion " + std::to_string(n + 1) +
                        " violates H4: (lambda0 - lambda)(mu0 - mu) must be positive");
    if (curve_to_curve_distance(inc.curve, outer, ns) < phantom.d0)
      throw ConfigError("inclusion " + std::to_string(n + 1) +
                        " violates H1: closer than d0 to the outer boundary");
    for (size_t j = 0; j < n; ++j) {
      if (curve_to_curve_distance(inc.curve, phantom.inclusions[j].curve, ns) < phantom.d0)
        throw ConfigError("inclusions " + std::to_string(j + 1) + " and " +
                          std::to_string(n + 1) + " violate H1 separation");
    }
  }
}

Phantom make_phantom(const std::string& name, const PhantomOverrides& overrides) {
  Phantom ph;
  ph.id = name;
  ph.semi_a = 10.0;
  ph.semi_b = 7.0;
  ph.lambda0 = 1.0;
  ph.mu0 = 1.0;
  ph.d0 = 0.5;
  if (name == "sparse-disks") {
    ph.inclusions.push_back({make_circle(1.0, Vec2(-5, 0)), 7.0, 7.0});
    ph.inclusions.push_back({make_circle(1.0, Vec2(0, 0)), 2.0, 2.0});
    ph.inclusions.push_back({make_circle(1.0, Vec2(5, 0)), 2.5, 2.5});
  } else if (name == "thin-straight") {
    ph.inclusions.push_back({make_stadium(4.0, 0.4, Vec2(0, 0), 0.0), 2.0, 2.0});
  } else if (name == "thin-curved") {
    ph.inclusions.push_back(
        {make_arc_band(6.0, 0.4, Vec2(0, -4), 65.0 * std::numbers::pi / 180.0,
                       115.0 * std::numbers::pi / 180.0),
         2.0, 2.0});
  } else if (name == "kite") {
    ph.inclusions.push_back({make_kite(3.0, Vec2(0, 0)), 2.0, 2.0});
  } else {
    throw ConfigError("unknown phantom id: " + name);
  }
  for (const auto& [key, value] : overrides) {
    if (key == "lambda0") {
      ph.lambda0 = value;
    } else if (key == "mu0") {
      ph.mu0 = value;
    } else if (key == "d0") {
      ph.d0 = value;
    } else if (key.rfind("lambda", 0) == 0 || key.rfind("mu", 0) == 0) {
      bool is_lambda = key.rfind("lambda", 0) == 0;
      std::string idx = key.substr(is_lambda ? 6 : 2);
      size_t n = 0;
      try {
        n = std::stoul(idx);
      } catch (const std::exception&) {
        throw ConfigError("unknown phantom override: " + key);
      }
      if (n < 1 || n > ph.inclusions.size())
        throw ConfigError("phantom override index out of range: " + key);
      (is_lambda ? ph.inclusions[n - 1].lambda : ph.inclusions[n - 1].mu) = value;
    } else {
      throw ConfigError("unknown phantom override: " + key);
    }
  }
  validate_phantom(ph);
  return ph;
}

DiscretizedBoundary sample_boundary(const ParamCurve& curve, int P) {
  if (P < 16 || P % 2 != 0)
    throw ConfigError("boundary sample count must be even and at least 16, got " +
                      std::to_string(P));
  DiscretizedBoundary bd;
  bd.points.resize(2, P);
  bd.normals.resize(2, P);
  bd.speeds.resize(P);
  bd.weights = VecX::Constant(P, 1.0 / P);
  bd.params.resize(P);
  for (int p = 0; p < P; ++p) {
    double t = static_cast<double>(p) / P;
    bd.params[p] = t;
    bd.points.col(p) = curve.position(t);
    Vec2 d = curve.derivative(t);
    bd.speeds[p] = d.norm();
    bd.normals.col(p) = Vec2(d.y(), -d.x()) / d.norm();
  }
  return bd;
}

int InteriorGrid::index_of(int i, int j) const {
  auto it = lookup_.find({i, j});
  return it == lookup_.end() ? -1 : it->second;
}

InteriorGrid interior_grid(const Phantom& phantom, double h) {
  if (!(h > 0)) throw ConfigError("grid spacing must be positive");
  InteriorGrid grid;
  grid.h = h;
  ParamCurve outer = phantom.boundary();
  double a = phantom.semi_a, b = phantom.semi_b;
  int imax = static_cast<int>(std::ceil(a / h)) + 1;
  int jmax = static_cast<int>(std::ceil(b / h)) + 1;
  std::vector<Vec2> pts;
  for (int i = -imax; i <= imax; ++i) {
    for (int j = -jmax; j <= jmax; ++j) {
      Vec2 p((i + 0.5) * h, (j + 0.5) * h);
      double q = p.x() * p.x() / (a * a) + p.y() * p.y() / (b * b);
      if (q >= 1.0) continue;
      if (distance_to_curve(outer, p) < phantom.d0) continue;
      grid.lookup_[{i, j}] = static_cast<int>(pts.size());
      pts.push_back(p);
      grid.cell_i.push_back(i);
      grid.cell_j.push_back(j);
    }
  }
  grid.points.resize(2, static_cast<Eigen::Index>(pts.size()));
  for (size_t l = 0; l < pts.size(); ++l) grid.points.col(static_cast<Eigen::Index>(l)) = pts[l];
  grid.truth.assign(pts.size(), false);
  grid.truth_inclusion.assign(pts.size(), -1);
  for (size_t l = 0; l < pts.size(); ++l) {
    for (size_t n = 0; n < phantom.inclusions.size(); ++n) {
      if (contains(phantom.inclusions[n].curve, pts[l])) {
        grid.truth[l] = true;
        grid.truth_inclusion[l] = static_cast<int>(n);
        break;
      }
    }
  }
  return grid;
}

bool contains(const ParamCurve& curve, const Vec2& x) {
  const int n = 4096;
  double winding = 0.0;
  Vec2 prev = curve.position(0.0) - x;
  double near2 = prev.squaredNorm();
  for (int i = 1; i <= n; ++i) {
    Vec2 cur = curve.position(static_cast<double>(i % n) / n) - x;
    near2 = std::min(near2, cur.squaredNorm());
    double cross = prev.x() * cur.y() - prev.y() * cur.x();
    double dot = prev.dot(cur);
    winding += std::atan2(cross, dot);
    prev = cur;
  }
  if (near2 < 1e-24) return true;  // on the curve
  return std::abs(winding) > std::numbers::pi;
}

double distance_to_curve(const ParamCurve& curve, const Vec2& x, int samples) {
  double best = std::numeric_limits<double>::infinity();
  int ibest = 0;
  for (int i = 0; i < samples; ++i) {
    double d2 = (curve.position(static_cast<double>(i) / samples) - x).squaredNorm();
    if (d2 < best) {
      best = d2;
      ibest = i;
    }
  }
  // Golden-section refinement around the best sample.
  double lo = static_cast<double>(ibest - 1) / samples;
  double hi = static_cast<double>(ibest + 1) / samples;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  auto f = [&](double t) { return (curve.position(t) - x).squaredNorm(); };
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 60; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = f(d);
    }
  }
  return std::sqrt(std::min({best, fc, fd}));
}

}  // namespace elg

#ifndef ELG_GEOMETRY_HPP
#define ELG_GEOMETRY_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "elg/types.hpp"

namespace elg {

/// Closed curve t in [0,1) -> R^2, counter-clockwise, with analytic tangent.
/// Outward unit normal is (y', -x')/|x'| for a CCW parametrization.
struct ParamCurve {
  std::function<Vec2(double)> position;
  std::function<Vec2(double)> derivative;

  Vec2 normal(double t) const {
    Vec2 d = derivative(t);
    return Vec2(d.y(), -d.x()) / d.norm();
  }
  double speed(double t) const { return derivative(t).norm(); }
};

ParamCurve make_ellipse(double a, double b, const Vec2& center = Vec2::Zero());
ParamCurve make_circle(double radius, const Vec2& center);
ParamCurve make_kite(double scale, const Vec2& center);
/// Stadium: straight segment of half-length `len` with semicircular caps of radius `rho`.
ParamCurve make_stadium(double len, double rho, const Vec2& center, double angle);
/// Circular band: mid-arc of radius `rad` about `center`, angles [t0,t1] (radians),
/// half-width `rho`, closed by semicircular caps.
ParamCurve make_arc_band(double rad, double rho, const Vec2& center, double t0, double t1);

struct Inclusion {
  ParamCurve curve;
  double lambda = 0.0;  // GPa
  double mu = 0.0;      // GPa
};

struct Phantom {
  std::string id;
  double semi_a = 0.0;  // mm
  double semi_b = 0.0;  // mm
  double lambda0 = 0.0;
  double mu0 = 0.0;
  double d0 = 0.5;  // H1 separation, mm
  std::vector<Inclusion> inclusions;

  ParamCurve boundary() const { return make_ellipse(semi_a, semi_b); }
};

/// Numeric overrides for the catalog; unknown keys are rejected.
/// Supported: lambda0, mu0, d0, lambda<n>, mu<n> (n = 1-based inclusion index).
using PhantomOverrides = std::map<std::string, double>;

/// Catalog phantoms: sparse-disks, thin-straight, thin-curved, kite.
/// Throws ConfigError on unknown ids or overrides violating H1-H4.
Phantom make_phantom(const std::string& name, const PhantomOverrides& overrides = {});

/// Validates strong convexity, H1 separation (via sampled curve distances), H3, H4.
/// Throws ConfigError with the violated hypothesis named.
void validate_phantom(const Phantom& phantom);

struct DiscretizedBoundary {
  Eigen::Matrix2Xd points;   // x(t_p)
  Eigen::Matrix2Xd normals;  // outward unit normals
  VecX speeds;               // |x'(t_p)|
  VecX weights;              // 1/P
  VecX params;               // t_p = p/P

  Eigen::Index size() const { return points.cols(); }
  /// Quadrature factor |x'_p| w_p for node p.
  double ds(Eigen::Index p) const { return speeds[p] * weights[p]; }
  double length() const { return speeds.dot(weights); }
};

/// Uniform periodic trapezoid nodes t_p = p/P. Requires P >= 16 and even.
DiscretizedBoundary sample_boundary(const ParamCurve& curve, int P);

struct InteriorGrid {
  double h = 0.0;
  Eigen::Matrix2Xd points;     // cell centers, one column per linear index
  std::vector<int> cell_i;     // lattice indices, x = (i + 1/2) h
  std::vector<int> cell_j;
  std::vector<bool> truth;     // inside a true inclusion (forward side only)
  std::vector<int> truth_inclusion;  // inclusion index per point, -1 outside

  Eigen::Index size() const { return points.cols(); }
  /// Linear index of lattice cell (i,j), or -1 if the cell is not in the grid.
  int index_of(int i, int j) const;

 private:
  std::map<std::pair<int, int>, int> lookup_;
  friend InteriorGrid interior_grid(const Phantom&, double);
};

/// Cell centers (i+1/2)h strictly inside the background ellipse with margin d0.
InteriorGrid interior_grid(const Phantom& phantom, double h);

/// Winding-number point-in-curve test; points within 1e-12 of the curve count as inside.
bool contains(const ParamCurve& curve, const Vec2& x);

/// Distance from x to the sampled curve, refined by local golden-section search.
double distance_to_curve(const ParamCurve& curve, const Vec2& x, int samples = 2048);

}  // namespace elg

#endif

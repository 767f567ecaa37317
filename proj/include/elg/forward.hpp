#ifndef ELG_FORWARD_HPP
#define ELG_FORWARD_HPP

#include <string>
#include <vector>

#include "elg/geometry.hpp"
#include "elg/kernels.hpp"
#include "elg/potentials.hpp"

namespace elg {

struct SourceConfig {
  std::vector<Vec2> points;  // z_m, strictly outside Omega
  int count() const { return static_cast<int>(points.size()); }
};

/// Background solution U_m = Gamma(. - z_m) e1 + rigid part, with the rigid
/// coefficients chosen so the discrete boundary trace is orthogonal to Psi.
struct BackgroundField {
  Vec2 z;
  Eigen::Vector3d rigid;  // coefficients of (1,0), (0,1), (x2,-x1)
  KernelConstants k;

  Vec2 eval(const Vec2& x) const;
  /// Surface traction; the rigid part has zero strain and divergence.
  Vec2 traction(const Vec2& x, const Vec2& nu) const;
};

BackgroundField background_field(const Vec2& z, const DiscretizedBoundary& bd,
                                 const KernelConstants& k);

/// Boundary and interior data of the transmission solve for all excitations.
struct FieldSamples {
  Phantom phantom;
  SourceConfig sources;
  DiscretizedBoundary bd_omega;                 // P nodes on the outer boundary
  std::vector<DiscretizedBoundary> bd_incl;     // arc-length-scaled nodes per inclusion
  std::vector<BackgroundField> background;      // one per excitation
  std::vector<VecX> U;                          // U_m at the P nodes, node-major
  std::vector<VecX> g;                          // tractions g_m
  std::vector<VecX> u;                          // total field u_m on the outer boundary
  std::vector<VecX> du;                         // Psi-projected u_m - U_m
  std::vector<std::vector<VecX>> phi;           // interior densities, [m][n]
  std::vector<std::vector<VecX>> psi;           // exterior inclusion densities, [m][n]
  std::vector<VecX> eta;                        // outer-boundary densities
  double condition_estimate = 0.0;

  /// Total field inside inclusion n (via the interior single layer).
  Vec2 interior_u(int m, int n, const Vec2& x) const;
  double interior_div_u(int m, int n, const Vec2& x) const;
  Mat2 interior_strain_u(int m, int n, const Vec2& x) const;
  /// Which inclusion contains x, or -1.
  int inclusion_at(const Vec2& x) const;
};

/// Assembles and solves the stacked three-block transmission system per excitation.
/// Inclusions with zero contrast are dropped; with none left u == U exactly.
FieldSamples solve_transmission(const Phantom& phantom, const SourceConfig& src, int P);

struct MeasurementConfig {
  std::string id;
  int R = 0;
  double arc = 1.0;  // fraction of the parameter circle covered
};

/// Known ids: R100, R32, R16, R16p (limited view, 3 pi / 2).
MeasurementConfig measurement_config(const std::string& id);

/// Parameter values of the measurement points for a config.
VecX measurement_params(const MeasurementConfig& cfg);

struct MeasurementSet {
  MeasurementConfig config;
  VecX params;                      // t_r
  Eigen::Matrix2Xd points;          // x_r on the outer boundary
  std::vector<Eigen::Matrix2Xd> data;  // (u_m - U_m)(x_r), one 2xR block per m
  double snr_db = std::numeric_limits<double>::infinity();
  unsigned long long seed = 0;
};

/// Interpolates nodal (u - U) to the config's boundary points (periodic cubic spline).
MeasurementSet measure(const FieldSamples& fs, const std::string& config_id);

/// Per-excitation Gaussian noise, sigma_m = |v_m|_2 10^(-snr/20) / sqrt(2R).
MeasurementSet add_noise(const MeasurementSet& ms, double snr_db, unsigned long long seed);

}  // namespace elg

#endif

#pragma once

#include <cstdint>

#include "eshelby/eshelby_tensor.hpp"
#include "eshelby/grid.hpp"
#include "eshelby/voigt.hpp"

namespace eshelby {

/// Far-field stress applied to the background.
struct RemoteLoad {
  Vec6 sigma0 = Vec6::Zero();  // Pa

  /// Only the axial (22) component set. Compression is negative.
  static RemoteLoad uniaxial(double axial_stress) {
    RemoteLoad l;
    l.sigma0(voigt::kAxial) = axial_stress;
    return l;
  }
};

/// eps0 = C0^-1 : sigma0 via the isotropic compliance.
Vec6 remote_strain(const RemoteLoad& load, const MaterialParams& bg);

/// Maximum reciprocal condition number accepted for (S + A).
inline constexpr double kSingularRcond = 1e-12;

/// eps2* = (S + A)^-1 : (-eps0). Throws SingularSystem when S + A is singular.
Vec6 eigenstrain_forward(const EshelbyTensor& s, const Matrix6& a, const Vec6& eps0);

/// Closed form of eps2* for a sphere (D1/D2/L expansion); assumes eps0_11 == eps0_33.
Vec6 eigenstrain_forward_sphere(double nu_b, const MaterialParams& incl, const MaterialParams& bg,
                                const Vec6& eps0);

/// eps = eps0 + S : eps*, uniform inside the inclusion.
inline Vec6 interior_strain(const Vec6& eps0, const EshelbyTensor& s, const Vec6& eig) {
  return eps0 + s.s * eig;
}

/// sigma = sigma0 + C0 . (S - I) : eps*.
inline Vec6 interior_stress(const Vec6& sigma0, const Matrix6& c0, const EshelbyTensor& s,
                            const Vec6& eig) {
  return sigma0 + c0 * (s.s - Matrix6::Identity()) * eig;
}

struct ForwardSolution {
  EshelbyTensor eshelby;
  Vec6 remote_strain = Vec6::Zero();
  Vec6 eigenstrain = Vec6::Zero();
  Vec6 strain = Vec6::Zero();
  Vec6 stress = Vec6::Zero();
};

/// Full forward chain for one inclusion. Equal inclusion/background material
/// is allowed and yields a zero eigenstrain.
ForwardSolution solve_forward(const InclusionGeometry& geom, const MaterialParams& incl,
                              const MaterialParams& bg, const RemoteLoad& load);

/// Synthetic phantom definition. Pixel (r, c) has its centre at index
/// coordinates (r, c); `center_row` / `center_col` may be fractional.
struct PhantomSpec {
  std::size_t rows = 128;
  std::size_t cols = 128;
  double dx = 0.02;  // cm
  double dy = 0.02;  // cm
  InclusionGeometry geometry = InclusionGeometry::sphere(0.3);
  double center_row = 63.5;
  double center_col = 63.5;
  MaterialParams incl{97020.0, 0.45};
  MaterialParams bg{32780.0, 0.2};
  /// Magnitude of the applied compression (Pa).
  double applied_stress = 1000.0;
  double noise_std = 0.0;
};

/// Strain grids use the compression-positive magnitude convention:
/// axial = -eps22, lateral = eps11, elevational = eps33.
struct Phantom {
  StrainField axial;
  StrainField lateral;
  StrainField elevational;
  BitGrid mask;
  StrainField ym_truth;
  StrainField pr_truth;
  ForwardSolution interior;
};

/// Pixel-centre-in-ellipse rasterization of the in-plane cross-section.
BitGrid rasterize_footprint(const PhantomSpec& spec);

/// Throws FootprintOverflow when the inclusion does not fit in the grid.
Phantom synth_phantom(const PhantomSpec& spec, std::uint64_t seed);

}  // namespace eshelby

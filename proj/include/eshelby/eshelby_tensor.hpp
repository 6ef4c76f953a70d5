#pragma once

#include <array>
#include <string_view>

#include "eshelby/voigt.hpp"

namespace eshelby {

enum class InclusionKind {
  Sphere,
  Ellipsoid,
  Cylinder,
  FlatEllipsoid,
  Penny,
  ThinDisk,
  PlaneStrainCylinder,
};

std::string_view to_string(InclusionKind kind) noexcept;
/// Accepts the lower-case names used in config files ("sphere", "thin_disk", ...).
InclusionKind inclusion_kind_from_string(std::string_view name);

/// Inclusion shape with semi-axes in cm stored along (x, y, z) = (lateral,
/// axial, elevational). Per-kind meaning:
///   Sphere               radius r in all three slots
///   Ellipsoid            (a, b, c) along x, y, z, any order
///   Cylinder             face semi-axes a (x) and c (z); y slot holds the
///                        in-plane half-length used for the image footprint
///   FlatEllipsoid        face (a, b) in x-y, thickness c along z, c << a, b
///   Penny                radius a = c, thickness b along y, b/a < 0.1
///   ThinDisk             radius a = b, thickness c along z, c/a < 0.1
///   PlaneStrainCylinder  face semi-axes a (x), b (y); infinite along z
struct InclusionGeometry {
  InclusionKind kind = InclusionKind::Sphere;
  std::array<double, 3> semi_axes{};

  static InclusionGeometry sphere(double radius);
  static InclusionGeometry ellipsoid(double ax, double ay, double az);
  static InclusionGeometry cylinder(double a, double half_length, double c);
  static InclusionGeometry flat_ellipsoid(double a, double b, double c);
  static InclusionGeometry penny(double radius, double thickness);
  static InclusionGeometry thin_disk(double radius, double thickness);
  static InclusionGeometry plane_strain_cylinder(double a, double b);

  /// Throws InvalidGeometry when a kind-specific invariant is violated.
  void validate() const;

  /// Semi-axes of the cross-section in the lateral/axial imaging plane.
  std::array<double, 2> in_plane_semi_axes() const;

  InclusionGeometry scaled(double factor) const;
};

/// Depolarization integrals indexed by (x, y, z). `pair` is symmetric and its
/// diagonal holds I11, I22, I33. Single terms are dimensionless; pair terms
/// carry 1/length^2.
struct ITerms {
  std::array<double, 3> single{};
  std::array<std::array<double, 3>, 3> pair{};
};

/// Relative axis separation below which the general ellipsoid formulas refuse.
inline constexpr double kAxisDegeneracy = 1e-4;
/// Factor applied to equal axes when the Ellipsoid path is asked for a spheroid.
inline constexpr double kSpheroidPerturbation = 1.001;

/// I-terms of a triaxial ellipsoid with a > b > c > 0 along x, y, z.
/// Throws DegenerateAxes when neighbouring axes are closer than kAxisDegeneracy.
ITerms i_terms_ellipsoid(double a, double b, double c);

/// I-terms of a flat ellipsoid a > b >> c (complete elliptic integrals only).
ITerms i_terms_flat_ellipsoid(double a, double b, double c);

/// Assembles S from I-terms and semi-axes (x, y, z) by cyclic permutation of
/// the S1111 / S1122 / S1212 expressions.
Matrix6 eshelby_from_i_terms(const ITerms& terms, const std::array<double, 3>& axes, double nu_b);

/// Voigt 6x6 form. Shear slots hold 2 S_ijij so engineering shear
/// eigenstrain maps to engineering shear strain, matching stiffness_matrix().
struct EshelbyTensor {
  Matrix6 s = Matrix6::Zero();
};

struct SphereCoefficients {
  double m1 = 0.0;  // S1111
  double m2 = 0.0;  // S1122
  double m3 = 0.0;  // S1212
};

SphereCoefficients sphere_coefficients(double nu_b);

/// Eshelby tensor of `geom` in a background with Poisson ratio nu_b.
EshelbyTensor eshelby_tensor(const InclusionGeometry& geom, double nu_b);

}  // namespace eshelby

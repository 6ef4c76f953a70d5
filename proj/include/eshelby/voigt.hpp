#pragma once

// Isotropic linear elasticity in 6x6 Voigt notation.
//
// Component order is (11, 22, 33, 23, 31, 12) where 1 = lateral (x),
// 2 = axial (y, the compression axis) and 3 = elevational (z). Every module
// in the library shares this order.

#include <Eigen/Dense>

namespace eshelby {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

namespace voigt {
inline constexpr int kLateral = 0;      // 11
inline constexpr int kAxial = 1;        // 22
inline constexpr int kElevational = 2;  // 33
inline constexpr int k23 = 3;
inline constexpr int k31 = 4;
inline constexpr int k12 = 5;
}  // namespace voigt

/// Poisson ratios at or above this are treated as incompressible (lambda diverges).
inline constexpr double kPoissonSingular = 0.5 - 1e-9;
/// Largest Poisson ratio used wherever a stiffness is assembled from estimated data.
inline constexpr double kPoissonCeiling = 0.495;
/// Axial strain magnitudes at or below this cannot be inverted.
inline constexpr double kMinAxialStrain = 1e-9;

struct MaterialParams {
  double youngs_modulus = 0.0;  // Pa
  double poissons_ratio = 0.0;

  /// Throws PoissonSingular / InvalidArgument when the invariants are violated.
  void validate() const;
};

struct LameParams {
  double lambda = 0.0;  // Pa
  double mu = 0.0;      // Pa
};

/// Closed-form mismatch scalars of X = (C - C0)^-1.
struct MismatchScalars {
  double psi = 0.0;    // 1/Pa
  double omega = 0.0;  // 1/Pa
  double phi = 0.0;    // 1/Pa
};

LameParams lame_from_engineering(const MaterialParams& p);

Matrix6 stiffness_matrix(const LameParams& l);
inline Matrix6 stiffness_matrix(const MaterialParams& p) {
  return stiffness_matrix(lame_from_engineering(p));
}

MismatchScalars mismatch_scalars(const MaterialParams& incl, const MaterialParams& bg);

/// A = (C - C0)^-1 . C0 assembled from the closed-form Psi/Omega/Phi scalars.
/// Throws ContrastSingular when C - C0 is (numerically) singular.
Matrix6 mismatch_A(const MaterialParams& incl, const MaterialParams& bg);

inline Vec6 apply_stiffness(const Matrix6& c, const Vec6& strain) { return c * strain; }

enum class StrainConvention {
  /// Physical signs: lateral and axial strain of an ordinary solid have opposite signs.
  Signed,
  /// Both components reported as positive magnitudes (compression-positive axial).
  Magnitude,
};

struct UniaxialEstimate {
  MaterialParams params;
  StrainConvention convention = StrainConvention::Signed;
  /// Raw ratio fell outside (-1, 0.5); params.poissons_ratio holds the clamped value.
  bool poisson_out_of_range = false;
  double raw_poissons_ratio = 0.0;
};

/// Detects the sign convention of an (axial, lateral) strain pair.
StrainConvention detect_convention(double eps_axial, double eps_lateral) noexcept;

/// Inverts uniaxial Hooke's law for a homogeneous region. E is computed on
/// magnitudes, nu with the sign convention detected from the inputs.
UniaxialEstimate invert_uniaxial(double sigma_applied, double eps_axial, double eps_lateral);

/// Same, with the convention fixed by the caller (used per pixel once a
/// dataset-wide convention is known).
UniaxialEstimate invert_uniaxial(double sigma_applied, double eps_axial, double eps_lateral,
                                 StrainConvention convention);

}  // namespace eshelby

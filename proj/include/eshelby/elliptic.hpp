#pragma once

namespace eshelby {

/// Incomplete elliptic integrals of the first (F) and second (E) kind in
/// Legendre form with modulus k.
struct EllipticIntegrals {
  double first = 0.0;   // F(theta, k)
  double second = 0.0;  // E(theta, k)
};

inline constexpr double kEllipticTolerance = 1e-10;

/// Requires 0 <= theta <= pi/2 and 0 <= k < 1 (ModulusOutOfRange otherwise).
EllipticIntegrals elliptic_integrals(double theta, double k);

/// Complete integrals K(k), E(k).
EllipticIntegrals complete_elliptic_integrals(double k);

}  // namespace eshelby

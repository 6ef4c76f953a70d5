#include "eshelby/elliptic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "eshelby/error.hpp"
#include "eshelby/quadrature.hpp"

namespace eshelby {

EllipticIntegrals elliptic_integrals(double theta, double k) {
  if (!(k >= 0.0 && k < 1.0)) {
    throw Error(ErrorCode::ModulusOutOfRange, "elliptic modulus must lie in [0, 1), got " +
                                                  std::to_string(k));
  }
  constexpr double kHalfPi = 0.5 * std::numbers::pi;
  if (!(theta >= 0.0 && theta <= kHalfPi + 1e-15)) {
    throw Error(ErrorCode::InvalidArgument,
                "elliptic amplitude must lie in [0, pi/2], got " + std::to_string(theta));
  }
  if (theta == 0.0) return {};
  // 1 - k^2 sin^2 written as cos^2 + k'^2 sin^2 to avoid cancellation near k = 1.
  const double kc2 = (1.0 - k) * (1.0 + k);
  // Quadrature error is controlled well below the contract tolerance so the
  // I-term differences built from these stay accurate.
  const double tol = 1e-3 * kEllipticTolerance;
  const auto first = quadrature::adaptive(
      [kc2](double w) {
        const double s = std::sin(w);
        const double c = std::cos(w);
        return 1.0 / std::sqrt(c * c + kc2 * s * s);
      },
      0.0, theta, tol);
  const auto second = quadrature::adaptive(
      [kc2](double w) {
        const double s = std::sin(w);
        const double c = std::cos(w);
        return std::sqrt(c * c + kc2 * s * s);
      },
      0.0, theta, tol);
  return {first.value, second.value};
}

EllipticIntegrals complete_elliptic_integrals(double k) {
  return elliptic_integrals(0.5 * std::numbers::pi, k);
}

}  // namespace eshelby

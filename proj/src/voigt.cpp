#include "eshelby/voigt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eshelby/error.hpp"

namespace eshelby {

namespace {
constexpr double kContrastEps = 1e-12;
}  // namespace

void MaterialParams::validate() const {
  if (!std::isfinite(youngs_modulus) || youngs_modulus <= 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "Young's modulus must be positive, got " + std::to_string(youngs_modulus));
  }
  if (!std::isfinite(poissons_ratio) || poissons_ratio <= -1.0) {
    throw Error(ErrorCode::InvalidArgument,
                "Poisson's ratio must exceed -1, got " + std::to_string(poissons_ratio));
  }
  if (poissons_ratio >= kPoissonSingular) {
    throw Error(ErrorCode::PoissonSingular,
                "Poisson's ratio " + std::to_string(poissons_ratio) + " is at the incompressible limit");
  }
}

LameParams lame_from_engineering(const MaterialParams& p) {
  p.validate();
  const double e = p.youngs_modulus;
  const double nu = p.poissons_ratio;
  return {e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu))};
}

Matrix6 stiffness_matrix(const LameParams& l) {
  Matrix6 c = Matrix6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) c(i, j) = l.lambda;
    c(i, i) = l.lambda + 2.0 * l.mu;
    c(i + 3, i + 3) = l.mu;
  }
  return c;
}

MismatchScalars mismatch_scalars(const MaterialParams& incl, const MaterialParams& bg) {
  const LameParams li = lame_from_engineering(incl);
  const LameParams lb = lame_from_engineering(bg);
  const double dmu = lb.mu - li.mu;
  if (std::abs(dmu) < kContrastEps * lb.mu) {
    throw Error(ErrorCode::ContrastSingular, "inclusion and background shear moduli coincide");
  }
  // Factors as (mu_b - mu_i) * (2 (mu_b - mu_i) + 3 (lambda_b - lambda_i)).
  const double den = 2.0 * lb.mu * lb.mu + 2.0 * li.mu * li.mu + 3.0 * lb.lambda * lb.mu -
                     3.0 * lb.lambda * li.mu - 3.0 * li.lambda * lb.mu + 3.0 * li.lambda * li.mu -
                     4.0 * lb.mu * li.mu;
  if (std::abs(den) < kContrastEps * lb.mu * lb.mu) {
    throw Error(ErrorCode::ContrastSingular, "inclusion and background bulk moduli coincide");
  }
  MismatchScalars s;
  s.psi = -(lb.lambda - li.lambda + lb.mu - li.mu) / den;
  s.omega = (lb.lambda - li.lambda) / (2.0 * den);
  s.phi = -1.0 / dmu;
  return s;
}

Matrix6 mismatch_A(const MaterialParams& incl, const MaterialParams& bg) {
  const MismatchScalars s = mismatch_scalars(incl, bg);
  const LameParams lb = lame_from_engineering(bg);
  const double diag = s.psi * (lb.lambda + 2.0 * lb.mu) + 2.0 * lb.lambda * s.omega;
  const double off = s.omega * (lb.lambda + 2.0 * lb.mu) + lb.lambda * s.omega + lb.lambda * s.psi;
  Matrix6 a = Matrix6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a(i, j) = off;
    a(i, i) = diag;
    a(i + 3, i + 3) = lb.mu * s.phi;
  }
  return a;
}

StrainConvention detect_convention(double eps_axial, double eps_lateral) noexcept {
  return (eps_axial * eps_lateral < 0.0) ? StrainConvention::Signed : StrainConvention::Magnitude;
}

UniaxialEstimate invert_uniaxial(double sigma_applied, double eps_axial, double eps_lateral) {
  return invert_uniaxial(sigma_applied, eps_axial, eps_lateral,
                         detect_convention(eps_axial, eps_lateral));
}

UniaxialEstimate invert_uniaxial(double sigma_applied, double eps_axial, double eps_lateral,
                                 StrainConvention convention) {
  if (!(std::abs(eps_axial) > kMinAxialStrain)) {
    throw Error(ErrorCode::DegenerateStrain,
                "axial strain " + std::to_string(eps_axial) + " is too small to invert");
  }
  UniaxialEstimate out;
  out.convention = convention;
  out.params.youngs_modulus = std::abs(sigma_applied) / std::abs(eps_axial);
  const double ratio = eps_lateral / eps_axial;
  // + 0.0 turns a negative zero into a positive one.
  out.raw_poissons_ratio = (convention == StrainConvention::Signed ? -ratio : ratio) + 0.0;
  double nu = out.raw_poissons_ratio;
  if (!(nu > -1.0 && nu < 0.5)) {
    out.poisson_out_of_range = true;
    nu = std::clamp(nu, -0.999, kPoissonCeiling);
  }
  out.params.poissons_ratio = nu;
  return out;
}

}  // namespace eshelby

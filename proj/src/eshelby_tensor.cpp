#include "eshelby/eshelby_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "eshelby/elliptic.hpp"
#include "eshelby/error.hpp"

namespace eshelby {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kThinRatio = 0.1;

// Voigt slot of the shear pair (i, j).
constexpr int shear_slot(int i, int j) {
  const int lo = std::min(i, j);
  const int hi = std::max(i, j);
  if (lo == 0 && hi == 1) return voigt::k12;
  if (lo == 1 && hi == 2) return voigt::k23;
  return voigt::k31;
}

void require_positive(const std::array<double, 3>& axes, const char* what) {
  for (double v : axes) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw Error(ErrorCode::InvalidGeometry, std::string(what) + " semi-axes must be positive");
    }
  }
}

void check_background_poisson(double nu_b, bool allow_incompressible) {
  if (!std::isfinite(nu_b) || nu_b <= -1.0) {
    throw Error(ErrorCode::InvalidArgument, "background Poisson ratio must exceed -1");
  }
  if (allow_incompressible ? nu_b > 0.5 : nu_b >= 0.5) {
    throw Error(ErrorCode::PoissonSingular,
                "background Poisson ratio " + std::to_string(nu_b) + " is not below 0.5");
  }
}

Matrix6 sphere_tensor(double nu_b) {
  const SphereCoefficients m = sphere_coefficients(nu_b);
  Matrix6 s = Matrix6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) s(i, j) = m.m2;
    s(i, i) = m.m1;
    s(i + 3, i + 3) = 2.0 * m.m3;
  }
  return s;
}

// Mura's elliptic-cylinder form with face axes p (x) and q (y), infinite along z.
Matrix6 elliptic_cylinder_tensor(double p, double q, double nu_b) {
  const double f = 1.0 / (2.0 * (1.0 - nu_b));
  const double sum = p + q;
  const double sum2 = sum * sum;
  const double k = 1.0 - 2.0 * nu_b;
  Matrix6 s = Matrix6::Zero();
  s(0, 0) = f * ((q * q + 2.0 * p * q) / sum2 + k * q / sum);
  s(1, 1) = f * ((p * p + 2.0 * p * q) / sum2 + k * p / sum);
  s(0, 1) = f * (q * q / sum2 - k * q / sum);
  s(1, 0) = f * (p * p / sum2 - k * p / sum);
  s(1, 2) = f * 2.0 * nu_b * p / sum;
  s(0, 2) = f * 2.0 * nu_b * q / sum;
  s(voigt::k12, voigt::k12) = f * ((p * p + q * q) / sum2 + k);
  s(voigt::k23, voigt::k23) = p / sum;
  s(voigt::k31, voigt::k31) = q / sum;
  return s;
}

// Thin circular disk normal to z, thickness ratio t = thickness / radius.
Matrix6 thin_disk_tensor(double t, double nu_b) {
  const double pt = kPi * t;
  const double one_minus = 1.0 - nu_b;
  Matrix6 s = Matrix6::Zero();
  s(0, 0) = s(1, 1) = (13.0 - 8.0 * nu_b) / (32.0 * one_minus) * pt;
  s(2, 2) = 1.0 - (1.0 - 2.0 * nu_b) / one_minus * pt / 4.0;
  s(0, 1) = s(1, 0) = (8.0 * nu_b - 1.0) / (32.0 * one_minus) * pt;
  s(0, 2) = s(1, 2) = (2.0 * nu_b - 1.0) / (8.0 * one_minus) * pt;
  // nu/(1-nu) * (1 - (4nu+1)/(8nu) pi t), rearranged to stay finite at nu = 0.
  s(2, 0) = s(2, 1) = (nu_b - (4.0 * nu_b + 1.0) / 8.0 * pt) / one_minus;
  s(voigt::k12, voigt::k12) = (7.0 - 8.0 * nu_b) / (16.0 * one_minus) * pt;
  s(voigt::k31, voigt::k31) = s(voigt::k23, voigt::k23) =
      1.0 + (nu_b - 2.0) / one_minus * pt / 4.0;
  return s;
}

// Indices of `axes` sorted by decreasing length (stable for ties).
std::array<int, 3> descending_order(const std::array<double, 3>& axes) {
  std::array<int, 3> idx{0, 1, 2};
  std::stable_sort(idx.begin(), idx.end(), [&](int l, int r) { return axes[l] > axes[r]; });
  return idx;
}

ITerms permute_back(const ITerms& sorted, const std::array<int, 3>& order) {
  ITerms out;
  for (int i = 0; i < 3; ++i) {
    out.single[order[i]] = sorted.single[i];
    for (int j = 0; j < 3; ++j) out.pair[order[i]][order[j]] = sorted.pair[i][j];
  }
  return out;
}

Matrix6 general_ellipsoid_tensor(const std::array<double, 3>& axes, double nu_b) {
  const std::array<int, 3> order = descending_order(axes);
  std::array<double, 3> sorted{axes[order[0]], axes[order[1]], axes[order[2]]};
  // Spheroids: separate equal axes so the triaxial formulas stay well conditioned.
  if (sorted[1] - sorted[2] < kAxisDegeneracy * sorted[1]) {
    sorted[1] = sorted[2] * kSpheroidPerturbation;
  }
  if (sorted[0] - sorted[1] < kAxisDegeneracy * sorted[0]) {
    sorted[0] = sorted[1] * kSpheroidPerturbation;
  }
  std::array<double, 3> used{};
  for (int i = 0; i < 3; ++i) used[order[i]] = sorted[i];
  const ITerms terms = permute_back(i_terms_ellipsoid(sorted[0], sorted[1], sorted[2]), order);
  return eshelby_from_i_terms(terms, used, nu_b);
}

Matrix6 flat_ellipsoid_tensor(const std::array<double, 3>& axes, double nu_b) {
  // Face axes may come in either order; the thin axis is always z.
  const bool swap = axes[0] < axes[1];
  const double a = swap ? axes[1] : axes[0];
  const double b = swap ? axes[0] : axes[1];
  ITerms sorted = i_terms_flat_ellipsoid(a, b, axes[2]);
  const std::array<int, 3> order = swap ? std::array<int, 3>{1, 0, 2} : std::array<int, 3>{0, 1, 2};
  return eshelby_from_i_terms(permute_back(sorted, order), axes, nu_b);
}

}  // namespace

std::string_view to_string(InclusionKind kind) noexcept {
  switch (kind) {
    case InclusionKind::Sphere: return "sphere";
    case InclusionKind::Ellipsoid: return "ellipsoid";
    case InclusionKind::Cylinder: return "cylinder";
    case InclusionKind::FlatEllipsoid: return "flat_ellipsoid";
    case InclusionKind::Penny: return "penny";
    case InclusionKind::ThinDisk: return "thin_disk";
    case InclusionKind::PlaneStrainCylinder: return "plane_strain_cylinder";
  }
  return "unknown";
}

InclusionKind inclusion_kind_from_string(std::string_view name) {
  for (InclusionKind k : {InclusionKind::Sphere, InclusionKind::Ellipsoid, InclusionKind::Cylinder,
                          InclusionKind::FlatEllipsoid, InclusionKind::Penny,
                          InclusionKind::ThinDisk, InclusionKind::PlaneStrainCylinder}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidGeometry, "unknown inclusion kind '" + std::string(name) + "'");
}

InclusionGeometry InclusionGeometry::sphere(double radius) {
  return {InclusionKind::Sphere, {radius, radius, radius}};
}
InclusionGeometry InclusionGeometry::ellipsoid(double ax, double ay, double az) {
  return {InclusionKind::Ellipsoid, {ax, ay, az}};
}
InclusionGeometry InclusionGeometry::cylinder(double a, double half_length, double c) {
  return {InclusionKind::Cylinder, {a, half_length, c}};
}
InclusionGeometry InclusionGeometry::flat_ellipsoid(double a, double b, double c) {
  return {InclusionKind::FlatEllipsoid, {a, b, c}};
}
InclusionGeometry InclusionGeometry::penny(double radius, double thickness) {
  return {InclusionKind::Penny, {radius, thickness, radius}};
}
InclusionGeometry InclusionGeometry::thin_disk(double radius, double thickness) {
  return {InclusionKind::ThinDisk, {radius, radius, thickness}};
}
InclusionGeometry InclusionGeometry::plane_strain_cylinder(double a, double b) {
  // z is unbounded; the slot keeps a positive placeholder for scaling checks.
  return {InclusionKind::PlaneStrainCylinder, {a, b, std::max(a, b)}};
}

void InclusionGeometry::validate() const {
  require_positive(semi_axes, std::string(to_string(kind)).c_str());
  const auto& [x, y, z] = semi_axes;
  switch (kind) {
    case InclusionKind::Sphere:
      if (x != y || y != z) throw Error(ErrorCode::InvalidGeometry, "sphere axes must be equal");
      break;
    case InclusionKind::Penny:
      if (std::abs(x - z) > 1e-12 * x) {
        throw Error(ErrorCode::InvalidGeometry, "penny requires equal x and z radii");
      }
      if (y / x >= kThinRatio) {
        throw Error(ErrorCode::InvalidGeometry, "penny requires thickness/radius < 0.1");
      }
      break;
    case InclusionKind::ThinDisk:
      if (std::abs(x - y) > 1e-12 * x) {
        throw Error(ErrorCode::InvalidGeometry, "thin disk requires equal x and y radii");
      }
      if (z / x >= kThinRatio) {
        throw Error(ErrorCode::InvalidGeometry, "thin disk requires thickness/radius < 0.1");
      }
      break;
    case InclusionKind::FlatEllipsoid:
      if (z >= kThinRatio * std::min(x, y)) {
        throw Error(ErrorCode::InvalidGeometry, "flat ellipsoid requires c < 0.1 min(a, b)");
      }
      if (std::abs(x - y) < kAxisDegeneracy * std::max(x, y)) {
        throw Error(ErrorCode::DegenerateAxes, "flat ellipsoid with a circular face; use thin_disk");
      }
      break;
    case InclusionKind::Ellipsoid:
    case InclusionKind::Cylinder:
    case InclusionKind::PlaneStrainCylinder:
      break;
  }
}

std::array<double, 2> InclusionGeometry::in_plane_semi_axes() const {
  return {semi_axes[0], semi_axes[1]};
}

InclusionGeometry InclusionGeometry::scaled(double factor) const {
  InclusionGeometry out = *this;
  for (double& v : out.semi_axes) v *= factor;
  return out;
}

ITerms i_terms_ellipsoid(double a, double b, double c) {
  if (!(c > 0.0 && b >= c && a >= b) || !std::isfinite(a)) {
    throw Error(ErrorCode::InvalidGeometry, "i_terms_ellipsoid requires a >= b >= c > 0");
  }
  if (a - b < kAxisDegeneracy * a || b - c < kAxisDegeneracy * b) {
    throw Error(ErrorCode::DegenerateAxes,
                "ellipsoid axes too close for the triaxial formulas; use a limit geometry");
  }
  const double a2 = a * a;
  const double b2 = b * b;
  const double c2 = c * c;
  const double root_ac = std::sqrt(a2 - c2);
  const double theta = std::asin(root_ac / a);
  const double k = std::sqrt((a2 - b2) / (a2 - c2));
  const EllipticIntegrals e = elliptic_integrals(theta, k);

  ITerms t;
  const double pref = 4.0 * kPi * a * b * c;
  t.single[0] = pref / ((a2 - b2) * root_ac) * (e.first - e.second);
  t.single[2] = pref / ((b2 - c2) * root_ac) * (b * root_ac / (a * c) - e.second);
  t.single[1] = 4.0 * kPi - t.single[0] - t.single[2];

  const std::array<double, 3> sq{a2, b2, c2};
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      t.pair[i][j] = t.pair[j][i] = (t.single[j] - t.single[i]) / (sq[i] - sq[j]);
    }
  }
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int l = (i + 2) % 3;
    t.pair[i][i] = (4.0 * kPi / sq[i] - t.pair[i][j] - t.pair[i][l]) / 3.0;
  }
  return t;
}

ITerms i_terms_flat_ellipsoid(double a, double b, double c) {
  if (!(c > 0.0 && b > c && a > b)) {
    throw Error(ErrorCode::InvalidGeometry, "flat ellipsoid requires a > b > c > 0");
  }
  const double a2 = a * a;
  const double b2 = b * b;
  const EllipticIntegrals e = complete_elliptic_integrals(std::sqrt((a2 - b2) / a2));
  const double gap = (e.first - e.second) * b * c / (a2 - b2);
  const double cb = c / b * e.second;

  ITerms t;
  t.single[0] = 4.0 * kPi * gap;
  t.single[1] = 4.0 * kPi * (cb - gap);
  t.single[2] = 4.0 * kPi * (1.0 - cb);
  t.pair[0][1] = t.pair[1][0] = 4.0 * kPi * (cb - 2.0 * gap) / (a2 - b2);
  t.pair[1][2] = t.pair[2][1] = 4.0 * kPi * (1.0 - 2.0 * cb + gap) / b2;
  t.pair[2][0] = t.pair[0][2] = 4.0 * kPi * (1.0 - cb - gap) / a2;
  t.pair[2][2] = 4.0 * kPi / (3.0 * c * c);
  t.pair[0][0] = (4.0 * kPi / a2 - t.pair[0][1] - t.pair[0][2]) / 3.0;
  t.pair[1][1] = (4.0 * kPi / b2 - t.pair[0][1] - t.pair[1][2]) / 3.0;
  return t;
}

Matrix6 eshelby_from_i_terms(const ITerms& terms, const std::array<double, 3>& axes, double nu_b) {
  const double f8 = 1.0 / (8.0 * kPi * (1.0 - nu_b));
  const double k = 1.0 - 2.0 * nu_b;
  Matrix6 s = Matrix6::Zero();
  for (int i = 0; i < 3; ++i) {
    const double ai2 = axes[i] * axes[i];
    s(i, i) = f8 * (3.0 * ai2 * terms.pair[i][i] + k * terms.single[i]);
    for (int j = 0; j < 3; ++j) {
      if (j == i) continue;
      const double aj2 = axes[j] * axes[j];
      s(i, j) = f8 * (aj2 * terms.pair[i][j] - k * terms.single[i]);
      if (j > i) {
        const int slot = shear_slot(i, j);
        s(slot, slot) =
            f8 * ((ai2 + aj2) * terms.pair[i][j] + k * (terms.single[i] + terms.single[j]));
      }
    }
  }
  return s;
}

SphereCoefficients sphere_coefficients(double nu_b) {
  const double d = 15.0 * (1.0 - nu_b);
  return {(7.0 - 5.0 * nu_b) / d, (5.0 * nu_b - 1.0) / d, (4.0 - 5.0 * nu_b) / d};
}

EshelbyTensor eshelby_tensor(const InclusionGeometry& geom, double nu_b) {
  geom.validate();
  check_background_poisson(nu_b, geom.kind == InclusionKind::Sphere);
  const auto& ax = geom.semi_axes;
  switch (geom.kind) {
    case InclusionKind::Sphere: return {sphere_tensor(nu_b)};
    case InclusionKind::Ellipsoid: return {general_ellipsoid_tensor(ax, nu_b)};
    case InclusionKind::Cylinder: return {elliptic_cylinder_tensor(ax[0], ax[2], nu_b)};
    case InclusionKind::PlaneStrainCylinder: return {elliptic_cylinder_tensor(ax[0], ax[1], nu_b)};
    case InclusionKind::FlatEllipsoid: return {flat_ellipsoid_tensor(ax, nu_b)};
    case InclusionKind::Penny: return {thin_disk_tensor(ax[1] / ax[0], nu_b)};
    case InclusionKind::ThinDisk: return {thin_disk_tensor(ax[2] / ax[0], nu_b)};
  }
  throw Error(ErrorCode::InvalidGeometry, "unhandled inclusion kind");
}

}  // namespace eshelby

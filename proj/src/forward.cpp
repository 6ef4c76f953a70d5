#include "eshelby/forward.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "eshelby/error.hpp"

namespace eshelby {

namespace {

// Box-Muller on raw 64-bit draws so the stream is identical across standard libraries.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

Vec6 remote_strain(const RemoteLoad& load, const MaterialParams& bg) {
  const LameParams l = lame_from_engineering(bg);
  const double e = bg.youngs_modulus;
  const double nu = bg.poissons_ratio;
  const Vec6& s = load.sigma0;
  Vec6 eps;
  eps(0) = (s(0) - nu * (s(1) + s(2))) / e;
  eps(1) = (s(1) - nu * (s(2) + s(0))) / e;
  eps(2) = (s(2) - nu * (s(0) + s(1))) / e;
  for (int i = 3; i < 6; ++i) eps(i) = s(i) / l.mu;
  return eps;
}

Vec6 eigenstrain_forward(const EshelbyTensor& s, const Matrix6& a, const Vec6& eps0) {
  const Matrix6 m = s.s + a;
  const Eigen::PartialPivLU<Matrix6> lu(m);
  if (!(lu.rcond() > kSingularRcond)) {
    throw Error(ErrorCode::SingularSystem, "S + A is singular");
  }
  return lu.solve(-eps0);
}

Vec6 eigenstrain_forward_sphere(double nu_b, const MaterialParams& incl, const MaterialParams& bg,
                                const Vec6& eps0) {
  const SphereCoefficients m = sphere_coefficients(nu_b);
  const MismatchScalars x = mismatch_scalars(incl, bg);
  const LameParams lb = lame_from_engineering(bg);
  const double a1 = x.psi * (lb.lambda + 2.0 * lb.mu) + 2.0 * lb.lambda * x.omega;
  const double a2 = x.omega * (lb.lambda + 2.0 * lb.mu) + lb.lambda * x.omega + lb.lambda * x.psi;
  const double big_l = a1 * a1 + a1 * a2 + 2.0 * a1 * m.m1 + a1 * m.m2 - 2.0 * a2 * a2 +
                       a2 * m.m1 - 4.0 * a2 * m.m2 + m.m1 * m.m1 + m.m1 * m.m2 -
                       2.0 * m.m2 * m.m2;
  const double e11 = eps0(voigt::kLateral);
  const double e22 = eps0(voigt::kAxial);
  Vec6 out = Vec6::Zero();
  out(0) = -e11 * (a1 + m.m1) / big_l + e22 * (a2 + m.m2) / big_l;
  out(1) = 2.0 * e11 * (a2 + m.m2) / big_l - e22 * (a1 + a2 + m.m1 + m.m2) / big_l;
  out(2) = out(0);
  return out;
}

ForwardSolution solve_forward(const InclusionGeometry& geom, const MaterialParams& incl,
                              const MaterialParams& bg, const RemoteLoad& load) {
  incl.validate();
  bg.validate();
  ForwardSolution sol;
  sol.eshelby = eshelby_tensor(geom, bg.poissons_ratio);
  sol.remote_strain = remote_strain(load, bg);
  const Matrix6 c0 = stiffness_matrix(bg);
  const Matrix6 c = stiffness_matrix(incl);
  const Matrix6 dc = c - c0;
  if (dc.cwiseAbs().maxCoeff() <= 1e-12 * c0.cwiseAbs().maxCoeff()) {
    sol.eigenstrain.setZero();
  } else {
    sol.eigenstrain = eigenstrain_forward(sol.eshelby, mismatch_A(incl, bg), sol.remote_strain);
  }
  sol.strain = interior_strain(sol.remote_strain, sol.eshelby, sol.eigenstrain);
  sol.stress = interior_stress(load.sigma0, c0, sol.eshelby, sol.eigenstrain);
  return sol;
}

BitGrid rasterize_footprint(const PhantomSpec& spec) {
  const auto [a_lat, a_ax] = spec.geometry.in_plane_semi_axes();
  const double half_cols = a_lat / spec.dx;
  const double half_rows = a_ax / spec.dy;
  if (spec.center_col - half_cols < -0.5 || spec.center_col + half_cols > spec.cols - 0.5 ||
      spec.center_row - half_rows < -0.5 || spec.center_row + half_rows > spec.rows - 0.5) {
    throw Error(ErrorCode::FootprintOverflow, "inclusion footprint extends past the grid");
  }
  BitGrid mask(spec.rows, spec.cols, spec.dx, spec.dy, 0);
  for (std::size_t r = 0; r < spec.rows; ++r) {
    const double v = (static_cast<double>(r) - spec.center_row) / half_rows;
    for (std::size_t c = 0; c < spec.cols; ++c) {
      const double u = (static_cast<double>(c) - spec.center_col) / half_cols;
      mask(r, c) = (u * u + v * v <= 1.0) ? 1 : 0;
    }
  }
  return mask;
}

Phantom synth_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  if (spec.rows == 0 || spec.cols == 0 || !(spec.dx > 0.0) || !(spec.dy > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "phantom grid must be non-empty with positive spacing");
  }
  if (!(spec.noise_std >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise_std must be non-negative");
  }
  Phantom ph;
  ph.mask = rasterize_footprint(spec);
  ph.interior = solve_forward(spec.geometry, spec.incl, spec.bg,
                              RemoteLoad::uniaxial(-spec.applied_stress));

  const Vec6& outside = ph.interior.remote_strain;
  const Vec6& inside = ph.interior.strain;
  ph.axial = StrainField(spec.rows, spec.cols, spec.dx, spec.dy);
  ph.lateral = ph.axial;
  ph.elevational = ph.axial;
  ph.ym_truth = ph.axial;
  ph.pr_truth = ph.axial;
  for (std::size_t i = 0; i < ph.mask.size(); ++i) {
    const bool in = ph.mask.values[i] != 0;
    const Vec6& e = in ? inside : outside;
    const MaterialParams& m = in ? spec.incl : spec.bg;
    ph.axial.values[i] = -e(voigt::kAxial);
    ph.lateral.values[i] = e(voigt::kLateral);
    ph.elevational.values[i] = e(voigt::kElevational);
    ph.ym_truth.values[i] = m.youngs_modulus;
    ph.pr_truth.values[i] = m.poissons_ratio;
  }
  if (spec.noise_std > 0.0) {
    GaussianStream noise(seed);
    for (StrainField* f : {&ph.axial, &ph.lateral, &ph.elevational}) {
      for (double& v : f->values) v += spec.noise_std * noise.next();
    }
  }
  return ph;
}

}  // namespace eshelby

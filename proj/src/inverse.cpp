#include "eshelby/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "eshelby/error.hpp"
#include "eshelby/forward.hpp"
#include "eshelby/kernels/kernels.hpp"

namespace eshelby {

namespace {

constexpr double kPenaltyFactor = 1e6;
constexpr double kRowEps = 1e-14;

Eigen::Vector3d normal_part(const Vec6& v) { return v.head<3>(); }

double bulk_modulus3(const LameParams& l) { return 3.0 * l.lambda + 2.0 * l.mu; }

}  // namespace

void SolverSettings::validate() const {
  if (max_iterations < 1) {
    throw Error(ErrorCode::InvalidConfig, "max_iterations must be at least 1");
  }
  if (!(ym_bound_low > 0.0) || !(ym_bound_low < ym_bound_high)) {
    throw Error(ErrorCode::InvalidConfig, "Young's modulus bound factors must satisfy 0 < low < high");
  }
  if (!(pr_upper < 0.5) || !(pr_upper > -1.0)) {
    throw Error(ErrorCode::InvalidConfig, "pr_upper must lie in (-1, 0.5)");
  }
  if (!(step_tolerance >= 0.0) || !(residual_tolerance >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "tolerances must be non-negative");
  }
}

Vec6 eigenstrain_inverse(const EshelbyTensor& s, const Vec6& eps, const Vec6& eps0) {
  const Eigen::PartialPivLU<Matrix6> lu(s.s);
  if (!(lu.rcond() > kSingularRcond)) {
    throw Error(ErrorCode::SingularSystem, "Eshelby tensor is singular");
  }
  return lu.solve(eps - eps0);
}

Vec6 eigenstrain_inverse_sphere(double nu_b, const Vec6& eps, const Vec6& eps0) {
  const SphereCoefficients m = sphere_coefficients(nu_b);
  const double d11 = eps(voigt::kLateral) - eps0(voigt::kLateral);
  const double d22 = eps(voigt::kAxial) - eps0(voigt::kAxial);
  const double den = m.m1 * m.m1 + m.m1 * m.m2 - 2.0 * m.m2 * m.m2;
  Vec6 out = Vec6::Zero();
  out(0) = (m.m1 * d11 - m.m2 * d22) / den;
  out(1) = ((m.m1 + m.m2) * d22 - 2.0 * m.m2 * d11) / den;
  out(2) = out(0);
  return out;
}

EigenstrainMismatch::EigenstrainMismatch(const EshelbyTensor& s, const Vec6& eps_pixel,
                                         const Vec6& eps0, const MaterialParams& bg,
                                         bool use_elevational)
    : s_(s.s.topLeftCorner<3, 3>()),
      delta_(normal_part(eps_pixel) - normal_part(eps0)),
      eps0_(normal_part(eps0)),
      inverse_eig_(Eigen::Vector3d::Zero()),
      bg_(bg),
      bg_lame_(lame_from_engineering(bg)),
      use_elevational_(use_elevational) {
  const double s_norm = s_.cwiseAbs().maxCoeff();
  for (int i = 0; i < 3; ++i) {
    undetermined_[i] = s_.row(i).cwiseAbs().maxCoeff() <= kRowEps * s_norm;
    reduced_ = reduced_ || undetermined_[i];
  }
  if (!reduced_) {
    const Eigen::PartialPivLU<Eigen::Matrix3d> lu(s_);
    if (!(lu.rcond() > kSingularRcond)) {
      throw Error(ErrorCode::SingularSystem, "normal block of the Eshelby tensor is singular");
    }
    inverse_eig_ = lu.solve(delta_);
  }
  scale_ = std::max({eps0_.cwiseAbs().maxCoeff(), delta_.cwiseAbs().maxCoeff(),
                     inverse_eig_.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min()});
}

CostValue EigenstrainMismatch::operator()(const MaterialParams& candidate) const {
  CostValue out;
  out.count = residual_count();

  auto penalty = [&] {
    out.penalized = true;
    out.j = 0.0;
    for (int k = 0; k < out.count; ++k) {
      out.residuals[k] = kPenaltyFactor * scale_;
      out.j += out.residuals[k] * out.residuals[k];
    }
    return out;
  };

  const LameParams li = lame_from_engineering(candidate);
  const double shear_rel = std::abs(li.mu - bg_lame_.mu) / bg_lame_.mu;
  const double bulk_rel =
      std::abs(bulk_modulus3(li) - bulk_modulus3(bg_lame_)) / std::abs(bulk_modulus3(bg_lame_));
  if (shear_rel < kContrastBand || bulk_rel < kContrastBand) return penalty();

  Eigen::Vector3d forward;
  try {
    const Eigen::Matrix3d a = mismatch_A(candidate, bg_).topLeftCorner<3, 3>();
    const Eigen::PartialPivLU<Eigen::Matrix3d> lu(s_ + a);
    if (!(lu.rcond() > kSingularRcond)) return penalty();
    forward = lu.solve(-eps0_);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ContrastSingular) return penalty();
    throw;
  }

  Eigen::Vector3d inverse = inverse_eig_;
  if (reduced_) {
    // Undetermined components follow the candidate; the rest solve the
    // remaining rows with those components moved to the right-hand side.
    int idx[3];
    int n = 0;
    Eigen::Vector3d rhs = delta_;
    for (int i = 0; i < 3; ++i) {
      if (undetermined_[i]) {
        inverse(i) = forward(i);
        rhs -= s_.col(i) * forward(i);
      } else {
        idx[n++] = i;
      }
    }
    if (n > 0) {
      Eigen::MatrixXd sub(n, n);
      Eigen::VectorXd b(n);
      for (int r = 0; r < n; ++r) {
        b(r) = rhs(idx[r]);
        for (int c = 0; c < n; ++c) sub(r, c) = s_(idx[r], idx[c]);
      }
      const Eigen::VectorXd sol = sub.partialPivLu().solve(b);
      for (int r = 0; r < n; ++r) inverse(idx[r]) = sol(r);
    }
  }

  // Residual order: lateral, axial, elevational.
  out.residuals[0] = inverse(voigt::kLateral) - forward(voigt::kLateral);
  out.residuals[1] = inverse(voigt::kAxial) - forward(voigt::kAxial);
  out.residuals[2] = use_elevational_ ? inverse(voigt::kElevational) - forward(voigt::kElevational)
                                      : 0.0;
  out.j = 0.0;
  for (int k = 0; k < out.count; ++k) out.j += out.residuals[k] * out.residuals[k];
  return out;
}

CostValue cost(const MaterialParams& candidate, const EshelbyTensor& s, const Vec6& eps_pixel,
               const Vec6& eps0, const MaterialParams& bg, bool use_elevational) {
  return EigenstrainMismatch(s, eps_pixel, eps0, bg, use_elevational)(candidate);
}

PixelSolution solve_pixel(const Vec6& eps_pixel, const Vec6& eps0, const EshelbyTensor& s,
                          const MaterialParams& bg, double sigma_a,
                          const SolverSettings& settings) {
  const double e_yy = eps_pixel(voigt::kAxial);
  if (!(std::abs(e_yy) > kMinAxialStrain)) {
    throw Error(ErrorCode::DegenerateStrain,
                "pixel axial strain " + std::to_string(e_yy) + " is too small to invert");
  }
  const double e_ref = std::abs(sigma_a) / std::abs(e_yy);
  if (!(e_ref > 0.0) || !std::isfinite(e_ref)) {
    throw Error(ErrorCode::InvalidArgument, "applied stress must be nonzero and finite");
  }
  const double nu_app = -eps_pixel(voigt::kLateral) / e_yy;

  const EigenstrainMismatch objective(s, eps_pixel, eps0, bg, settings.use_elevational);

  Eigen::Vector2d lower(settings.ym_bound_low,
                        std::max(settings.pr_lower_factor * std::abs(nu_app), -0.99));
  Eigen::Vector2d upper(settings.ym_bound_high, settings.pr_upper);
  lower(1) = std::min(lower(1), upper(1));
  const Eigen::Vector2d x0(std::clamp(1.0, lower(0), upper(0)),
                           std::clamp(nu_app, lower(1), std::max(lower(1), std::min(0.45, upper(1)))));

  auto residual = [&](const Eigen::Vector2d& x, Eigen::Vector3d& r) {
    const CostValue c = objective(MaterialParams{x(0) * e_ref, x(1)});
    r = Eigen::Vector3d(c.residuals[0], c.residuals[1], c.residuals[2]);
  };

  lsq::Options opt;
  opt.max_iterations = settings.max_iterations;
  opt.step_tolerance = settings.step_tolerance;
  const double tol = settings.residual_tolerance * normal_part(eps0).norm();
  opt.cost_tolerance = tol * tol;
  const lsq::Result<2> fit = lsq::minimize<2, 3>(residual, x0, lower, upper, opt);

  PixelSolution out;
  out.params = MaterialParams{fit.x(0) * e_ref, fit.x(1)};
  PixelDiagnostics& d = out.diagnostics;
  d.iterations = fit.iterations;
  d.evaluations = fit.evaluations;
  d.final_cost = fit.cost;
  d.converged = fit.converged();
  d.stop = fit.reason;
  d.ym_at_lower = fit.at_lower(0);
  d.ym_at_upper = fit.at_upper(0);
  d.pr_at_lower = fit.at_lower(1);
  d.pr_at_upper = fit.at_upper(1);
  d.ym_lower = lower(0) * e_ref;
  d.ym_upper = upper(0) * e_ref;
  d.pr_lower = lower(1);
  d.pr_upper = upper(1);
  return out;
}

namespace {

double window_mean(const StrainField& f, const PixelWindow& w) {
  const auto& k = kernels::active();
  const std::vector<std::uint8_t> ones(w.width, 1);
  double total = 0.0;
  for (std::size_t r = w.row; r < w.row + w.height; ++r) {
    const std::span<const double> row(f.values.data() + r * f.cols + w.col, w.width);
    total += k.masked_moments(row, ones).sum;
  }
  return total / static_cast<double>(w.width * w.height);
}

void check_window(const PixelWindow& w, std::size_t rows, std::size_t cols, const BitGrid* mask) {
  if (!w.fits(rows, cols)) {
    throw Error(ErrorCode::WindowOutOfBounds,
                "background window " + std::to_string(w.height) + "x" + std::to_string(w.width) +
                    " at (" + std::to_string(w.row) + ", " + std::to_string(w.col) +
                    ") does not fit a " + std::to_string(rows) + "x" + std::to_string(cols) +
                    " grid");
  }
  if (mask == nullptr) return;
  for (std::size_t r = w.row; r < w.row + w.height; ++r) {
    for (std::size_t c = w.col; c < w.col + w.width; ++c) {
      if ((*mask)(r, c)) {
        throw Error(ErrorCode::WindowOverlapsMask,
                    "background window covers inclusion pixel (" + std::to_string(r) + ", " +
                        std::to_string(c) + ")");
      }
    }
  }
}

}  // namespace

BackgroundEstimate estimate_background(const StrainField& axial, const StrainField& lateral,
                                       const PixelWindow& window, double sigma_a,
                                       const BitGrid* mask) {
  if (!axial.congruent(lateral) || (mask != nullptr && !axial.congruent(*mask))) {
    throw Error(ErrorCode::HeaderMismatch, "strain grids and mask are not congruent");
  }
  check_window(window, axial.rows, axial.cols, mask);
  BackgroundEstimate out;
  out.mean_axial = window_mean(axial, window);
  out.mean_lateral = window_mean(lateral, window);
  const UniaxialEstimate u = invert_uniaxial(sigma_a, out.mean_axial, out.mean_lateral);
  out.params = u.params;
  out.convention = u.convention;
  out.poisson_out_of_range = u.poisson_out_of_range;
  return out;
}

ReconstructionResult reconstruct(const StrainData& strains, const BitGrid& mask,
                                 const InclusionGeometry& geom, double sigma_a,
                                 const SolverSettings& settings, const PixelWindow& window) {
  settings.validate();
  if (strains.axial == nullptr || strains.lateral == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "axial and lateral strain grids are required");
  }
  const StrainField& axial = *strains.axial;
  const StrainField& lateral = *strains.lateral;
  const StrainField* elevational = strains.elevational;
  if (!axial.congruent(lateral) || !axial.congruent(mask) ||
      (elevational != nullptr && !axial.congruent(*elevational))) {
    throw Error(ErrorCode::HeaderMismatch, "strain grids and mask are not congruent");
  }
  if (settings.use_elevational && elevational == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "use_elevational requires an elevational strain grid");
  }
  if (count_set(mask) == 0) {
    throw Error(ErrorCode::MissingMask, "inclusion mask is empty");
  }

  ReconstructionResult res;
  res.background = estimate_background(axial, lateral, window, sigma_a, &mask);
  const bool magnitude = res.background.convention == StrainConvention::Magnitude;
  const double axial_sign = magnitude ? -1.0 : 1.0;

  res.nu_b_used = std::min(res.background.params.poissons_ratio, kPoissonCeiling);
  const MaterialParams bg{res.background.params.youngs_modulus, res.nu_b_used};
  res.eshelby = eshelby_tensor(geom, res.nu_b_used);

  // Signed strains and stress: compression negative.
  const double sigma22 = magnitude ? -std::abs(sigma_a)
                                   : std::copysign(std::abs(sigma_a), res.background.mean_axial);
  Vec6 eps0 = Vec6::Zero();
  eps0(voigt::kLateral) = res.background.mean_lateral;
  eps0(voigt::kAxial) = axial_sign * res.background.mean_axial;
  eps0(voigt::kElevational) =
      elevational != nullptr ? window_mean(*elevational, window) : res.background.mean_lateral;
  res.remote_strain = eps0;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  res.ym_map = axial.like<double>(nan);
  res.pr_map = axial.like<double>(nan);
  res.validity = axial.like<std::uint8_t>(0);
  res.status = axial.like<std::uint8_t>(static_cast<std::uint8_t>(PixelStatus::Ok));
  res.iterations = axial.like<int>(0);
  res.residual = axial.like<double>(0.0);

  // Outside the inclusion: pointwise uniaxial inversion.
  kernels::active().uniaxial_map(axial.span(), lateral.span(), std::abs(sigma_a),
                                 magnitude ? 1.0 : -1.0, res.ym_map.span(), res.pr_map.span());
  for (std::size_t i = 0; i < axial.size(); ++i) {
    if (mask.values[i]) continue;
    auto& status = res.status.values[i];
    if (!(std::abs(axial.values[i]) > kMinAxialStrain)) {
      status = static_cast<std::uint8_t>(PixelStatus::DegenerateStrain);
      res.ym_map.values[i] = nan;
      res.pr_map.values[i] = nan;
      continue;
    }
    double& nu = res.pr_map.values[i];
    nu += 0.0;
    if (!(nu > -1.0 && nu < 0.5)) {
      status = static_cast<std::uint8_t>(PixelStatus::PoissonOutOfRange);
      nu = std::clamp(nu, -0.999, kPoissonCeiling);
      continue;
    }
    res.validity.values[i] = 1;
  }

  // Inside the inclusion: independent bounded least-squares solves.
  std::vector<std::size_t> pixels;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.values[i]) pixels.push_back(i);
  }
  res.inclusion_pixels = pixels.size();

  struct Outcome {
    PixelStatus status = PixelStatus::Ok;
    MaterialParams params{std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::quiet_NaN()};
    int iterations = 0;
    double cost = 0.0;
    bool bound_hit = false;
  };
  std::vector<Outcome> outcomes(pixels.size());

  auto solve_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const std::size_t i = pixels[p];
      Outcome& o = outcomes[p];
      Vec6 eps = Vec6::Zero();
      eps(voigt::kLateral) = lateral.values[i];
      eps(voigt::kAxial) = axial_sign * axial.values[i];
      eps(voigt::kElevational) = elevational != nullptr ? elevational->values[i] : lateral.values[i];
      if (!(std::abs(eps(voigt::kAxial)) > kMinAxialStrain)) {
        o.status = PixelStatus::DegenerateStrain;
        continue;
      }
      try {
        const PixelSolution sol = solve_pixel(eps, eps0, res.eshelby, bg, sigma22, settings);
        const PixelDiagnostics& d = sol.diagnostics;
        o.params = sol.params;
        o.iterations = d.iterations;
        o.cost = d.final_cost;
        o.bound_hit = d.ym_at_lower || d.ym_at_upper || d.pr_at_lower || d.pr_at_upper;
        o.status = d.converged ? PixelStatus::Ok : PixelStatus::NotConverged;
      } catch (const Error&) {
        o.status = PixelStatus::SolverFailure;
        o.params = MaterialParams{nan, nan};
      }
    }
  };

  unsigned threads = settings.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                           : settings.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, pixels.size()));
  if (threads <= 1) {
    solve_range(0, pixels.size());
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (pixels.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(pixels.size(), t * chunk);
      const std::size_t end = std::min(pixels.size(), begin + chunk);
      workers.emplace_back(solve_range, begin, end);
    }
    for (auto& w : workers) w.join();
  }

  for (std::size_t p = 0; p < pixels.size(); ++p) {
    const std::size_t i = pixels[p];
    const Outcome& o = outcomes[p];
    res.ym_map.values[i] = o.params.youngs_modulus;
    res.pr_map.values[i] = o.params.poissons_ratio;
    res.status.values[i] = static_cast<std::uint8_t>(o.status);
    res.iterations.values[i] = o.iterations;
    res.residual.values[i] = o.cost;
    res.validity.values[i] = o.status == PixelStatus::Ok || o.status == PixelStatus::NotConverged;
    res.not_converged_pixels += o.status == PixelStatus::NotConverged;
    res.bound_hit_pixels += o.bound_hit;
  }
  for (auto v : res.validity.values) res.invalid_pixels += (v == 0);
  return res;
}

}  // namespace eshelby

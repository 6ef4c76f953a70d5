#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "eshelby/bounded_lsq.hpp"
#include "eshelby/eshelby_tensor.hpp"
#include "eshelby/grid.hpp"
#include "eshelby/voigt.hpp"

namespace eshelby {

struct SolverSettings {
  int max_iterations = 100;
  double step_tolerance = 1e-10;
  /// Stop when sqrt(J) / |eps0| falls below this.
  double residual_tolerance = 1e-12;
  /// Young's modulus search box as multiples of sigma_a / eps_yy(pixel).
  double ym_bound_low = 0.1;
  double ym_bound_high = 100.0;
  /// Poisson lower bound = factor * |eps_xx / eps_yy|.
  double pr_lower_factor = -0.8;
  double pr_upper = kPoissonCeiling;
  bool use_elevational = false;
  /// Worker threads for reconstruct(); 0 picks the hardware concurrency.
  unsigned threads = 0;

  /// Throws InvalidConfig when the invariants do not hold.
  void validate() const;
};

/// eps1* = S^-1 : (eps - eps0). Throws SingularSystem for singular S.
Vec6 eigenstrain_inverse(const EshelbyTensor& s, const Vec6& eps, const Vec6& eps0);

/// Closed form of eps1* for a sphere; uses eps11 == eps33.
Vec6 eigenstrain_inverse_sphere(double nu_b, const Vec6& eps, const Vec6& eps0);

struct CostValue {
  double j = 0.0;
  std::array<double, 3> residuals{};
  int count = 2;
  /// Candidate sat inside the singular-contrast band and a penalty was returned.
  bool penalized = false;
};

/// Relative band around unit contrast (shear or bulk modulus) treated as singular.
inline constexpr double kContrastBand = 1e-6;

/// Eigenstrain-mismatch objective for one pixel. The inverse eigenstrain is
/// fixed per pixel and computed once; each call evaluates the forward
/// eigenstrain for a candidate inclusion.
///
/// When rows of S vanish (infinitely long inclusions), the corresponding
/// eigenstrain components are not determined by the strain and are taken
/// from the forward eigenstrain of the candidate.
class EigenstrainMismatch {
 public:
  EigenstrainMismatch(const EshelbyTensor& s, const Vec6& eps_pixel, const Vec6& eps0,
                      const MaterialParams& bg, bool use_elevational);

  CostValue operator()(const MaterialParams& candidate) const;

  int residual_count() const noexcept { return use_elevational_ ? 3 : 2; }
  double scale() const noexcept { return scale_; }

 private:
  Eigen::Matrix3d s_;
  Eigen::Vector3d delta_;  // eps - eps0
  Eigen::Vector3d eps0_;
  Eigen::Vector3d inverse_eig_;  // valid when undetermined_ is empty
  std::array<bool, 3> undetermined_{};
  bool reduced_ = false;
  MaterialParams bg_;
  LameParams bg_lame_;
  bool use_elevational_;
  double scale_;
};

/// J(candidate) = sum_k (eps1*(k) - eps2*(k))^2 over lateral, axial (and elevational).
CostValue cost(const MaterialParams& candidate, const EshelbyTensor& s, const Vec6& eps_pixel,
               const Vec6& eps0, const MaterialParams& bg, bool use_elevational = false);

struct PixelDiagnostics {
  int iterations = 0;
  int evaluations = 0;
  double final_cost = 0.0;
  bool converged = false;
  lsq::StopReason stop = lsq::StopReason::MaxIterations;
  bool ym_at_lower = false;
  bool ym_at_upper = false;
  bool pr_at_lower = false;
  bool pr_at_upper = false;
  double ym_lower = 0.0;
  double ym_upper = 0.0;
  double pr_lower = 0.0;
  double pr_upper = 0.0;
};

struct PixelSolution {
  MaterialParams params;
  PixelDiagnostics diagnostics;
};

/// Bounded least-squares estimate of (E_i, nu_i) for one pixel. eps_pixel and
/// eps0 are signed strains; sigma_a is the applied axial stress (either sign).
PixelSolution solve_pixel(const Vec6& eps_pixel, const Vec6& eps0, const EshelbyTensor& s,
                          const MaterialParams& bg, double sigma_a, const SolverSettings& settings);

struct BackgroundEstimate {
  MaterialParams params;
  StrainConvention convention = StrainConvention::Magnitude;
  double mean_axial = 0.0;
  double mean_lateral = 0.0;
  bool poisson_out_of_range = false;
};

/// Mean strains over `window` inverted with uniaxial Hooke's law. When a
/// mask is given the window must not touch it (WindowOverlapsMask).
BackgroundEstimate estimate_background(const StrainField& axial, const StrainField& lateral,
                                       const PixelWindow& window, double sigma_a,
                                       const BitGrid* mask = nullptr);

enum class PixelStatus : std::uint8_t {
  Ok = 0,
  NotConverged = 1,
  DegenerateStrain = 2,
  PoissonOutOfRange = 3,
  SolverFailure = 4,
};

struct ReconstructionResult {
  StrainField ym_map;
  StrainField pr_map;
  BitGrid validity;
  Grid<std::uint8_t> status;
  Grid<int> iterations;
  StrainField residual;
  BackgroundEstimate background;
  /// Background Poisson ratio actually used for S and C0 (clamped to 0.495).
  double nu_b_used = 0.0;
  EshelbyTensor eshelby;
  Vec6 remote_strain = Vec6::Zero();
  std::size_t inclusion_pixels = 0;
  std::size_t invalid_pixels = 0;
  std::size_t not_converged_pixels = 0;
  std::size_t bound_hit_pixels = 0;
};

struct StrainData {
  const StrainField* axial = nullptr;
  const StrainField* lateral = nullptr;
  const StrainField* elevational = nullptr;  // optional
};

/// Full per-pixel reconstruction. Inclusion pixels are solved independently
/// (in parallel when settings.threads != 1); all others get the uniaxial
/// inversion. Output does not depend on the thread count.
ReconstructionResult reconstruct(const StrainData& strains, const BitGrid& mask,
                                 const InclusionGeometry& geom, double sigma_a,
                                 const SolverSettings& settings, const PixelWindow& window);

}  // namespace eshelby

#pragma once

#include <cstddef>
#include <vector>

#include "eshelby/eshelby_tensor.hpp"
#include "eshelby/grid.hpp"

namespace eshelby {

/// size x size median with edge replication. With `labels`, each pixel only
/// sees neighbours carrying the same label (nonzero vs zero), so inclusion
/// and background values are never mixed. size must be odd; 1 is identity.
StrainField median_filter(const StrainField& f, std::size_t size, const BitGrid* labels = nullptr);

struct EllipseFit {
  double center_x = 0.0;  // cm, lateral
  double center_y = 0.0;  // cm, axial
  double semi_major = 0.0;  // cm
  double semi_minor = 0.0;  // cm
  /// Major-axis angle from the lateral axis, in (-pi/2, pi/2].
  double orientation = 0.0;
  /// Semi-axes mapped onto the image axes.
  double semi_lateral = 0.0;
  double semi_axial = 0.0;
  std::size_t pixels = 0;
  /// Minor axis shorter than one pixel.
  bool degenerate = false;
  /// Major axis more than 15 degrees away from both image axes.
  bool orientation_warning = false;
};

inline constexpr std::size_t kMinEllipsePixels = 10;
inline constexpr double kOrientationWarning = 0.2617993877991494;  // 15 deg

/// Moment-equivalent ellipse, rescaled to the mask area. Throws MaskTooSmall.
EllipseFit fit_ellipse(const BitGrid& mask, double dx, double dy);

/// Sphere when the in-plane axes agree within `tolerance` (relative),
/// otherwise an ellipsoid with the elevational axis equal to the lateral one.
InclusionGeometry geometry_from_ellipse(const EllipseFit& fit, double tolerance = 0.01);

struct CreepSeries {
  std::vector<double> time;  // s
  std::vector<double> axial;
  std::vector<double> lateral;

  void validate() const;
};

struct SteadyState {
  double axial = 0.0;
  double lateral = 0.0;
  double onset = 0.0;  // s
  std::size_t onset_index = 0;
  std::size_t tail_samples = 0;
};

/// Normalised slope threshold in fractions of the series range per second.
inline constexpr double kPlateauSlope = 0.002;

/// Plateau of a creep series. Slopes are least-squares fits over sliding
/// windows of window_fraction * n samples (at least 3). The onset is the
/// first window start after which every window of both components stays
/// below `threshold` * range per second. Throws NoPlateau.
SteadyState steady_state(const CreepSeries& series, double window_fraction = 0.1,
                         double threshold = kPlateauSlope);

/// sqrt(sum (e - t)^2 / N) * 100 N / sum t over the mask. Throws ZeroTruthSum.
double rmse_percent(const StrainField& estimated, const StrainField& truth, const BitGrid& mask);

struct ShapeMetrics {
  double surface_area = 0.0;  // cm^2
  double solidity = 0.0;
  std::size_t pixels = 0;
  double hull_area = 0.0;  // pixel units
};

inline constexpr double kWindowAreaCm2 = 16.0;

/// Area n_p * window_area / n_t and solidity against the convex hull of the
/// pixel squares. total_pixels = 0 uses the grid size.
ShapeMetrics shape_metrics(const BitGrid& mask, std::size_t total_pixels = 0,
                           double window_area_cm2 = kWindowAreaCm2);

}  // namespace eshelby

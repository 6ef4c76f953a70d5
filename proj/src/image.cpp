#include "eshelby/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "eshelby/error.hpp"
#include "eshelby/kernels/kernels.hpp"

namespace eshelby {

StrainField median_filter(const StrainField& f, std::size_t size, const BitGrid* labels) {
  if (size == 0 || size % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument,
                "median filter size must be odd and positive, got " + std::to_string(size));
  }
  if (labels != nullptr && !f.congruent(*labels)) {
    throw Error(ErrorCode::HeaderMismatch, "median filter labels are not congruent with the field");
  }
  if (size == 1 || f.size() == 0) return f;

  const auto half = static_cast<std::ptrdiff_t>(size / 2);
  const auto rows = static_cast<std::ptrdiff_t>(f.rows);
  const auto cols = static_cast<std::ptrdiff_t>(f.cols);
  StrainField out = f;
  std::vector<double> buf;
  buf.reserve(size * size);
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    for (std::ptrdiff_t c = 0; c < cols; ++c) {
      const bool label = labels != nullptr && (*labels)(r, c) != 0;
      buf.clear();
      for (std::ptrdiff_t dr = -half; dr <= half; ++dr) {
        const auto rr = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(r + dr, 0, rows - 1));
        for (std::ptrdiff_t dc = -half; dc <= half; ++dc) {
          const auto cc = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(c + dc, 0, cols - 1));
          if (labels != nullptr && ((*labels)(rr, cc) != 0) != label) continue;
          buf.push_back(f(rr, cc));
        }
      }
      const std::size_t mid = buf.size() / 2;
      std::nth_element(buf.begin(), buf.begin() + mid, buf.end());
      double m = buf[mid];
      if (buf.size() % 2 == 0) {
        const double below = *std::max_element(buf.begin(), buf.begin() + mid);
        m = below + (m - below) / 2.0;
      }
      out(r, c) = m;
    }
  }
  return out;
}

EllipseFit fit_ellipse(const BitGrid& mask, double dx, double dy) {
  if (!(dx > 0.0) || !(dy > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "pixel spacing must be positive");
  }
  EllipseFit fit;
  double sx = 0.0, sy = 0.0;
  for (std::size_t r = 0; r < mask.rows; ++r) {
    for (std::size_t c = 0; c < mask.cols; ++c) {
      if (!mask(r, c)) continue;
      ++fit.pixels;
      sx += static_cast<double>(c);
      sy += static_cast<double>(r);
    }
  }
  if (fit.pixels < kMinEllipsePixels) {
    throw Error(ErrorCode::MaskTooSmall, "mask has " + std::to_string(fit.pixels) +
                                             " pixels, at least " +
                                             std::to_string(kMinEllipsePixels) + " are needed");
  }
  const double n = static_cast<double>(fit.pixels);
  const double mc = sx / n;
  const double mr = sy / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t r = 0; r < mask.rows; ++r) {
    for (std::size_t c = 0; c < mask.cols; ++c) {
      if (!mask(r, c)) continue;
      const double u = (static_cast<double>(c) - mc) * dx;
      const double v = (static_cast<double>(r) - mr) * dy;
      sxx += u * u;
      syy += v * v;
      sxy += u * v;
    }
  }
  // Second moments of the pixel squares, not just their centres.
  const double cxx = sxx / n + dx * dx / 12.0;
  const double cyy = syy / n + dy * dy / 12.0;
  const double cxy = sxy / n;

  const double mean = 0.5 * (cxx + cyy);
  const double diff = 0.5 * (cxx - cyy);
  const double root = std::hypot(diff, cxy);
  const double l1 = mean + root;
  const double l2 = std::max(mean - root, 0.0);
  double a = 2.0 * std::sqrt(l1);
  double b = 2.0 * std::sqrt(l2);
  const double area = n * dx * dy;
  if (a * b > 0.0) {
    const double k = std::sqrt(area / (std::numbers::pi * a * b));
    a *= k;
    b *= k;
  }

  double theta = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
  if (theta <= -std::numbers::pi / 2.0) theta += std::numbers::pi;
  fit.center_x = mc * dx;
  fit.center_y = mr * dy;
  fit.semi_major = a;
  fit.semi_minor = b;
  fit.orientation = theta;
  const bool along_x = std::abs(std::cos(theta)) >= std::abs(std::sin(theta));
  fit.semi_lateral = along_x ? a : b;
  fit.semi_axial = along_x ? b : a;
  fit.degenerate = b < std::min(dx, dy);
  const double tilt = std::min(std::abs(theta), std::numbers::pi / 2.0 - std::abs(theta));
  fit.orientation_warning = tilt > kOrientationWarning;
  return fit;
}

InclusionGeometry geometry_from_ellipse(const EllipseFit& fit, double tolerance) {
  const double lat = fit.semi_lateral;
  const double ax = fit.semi_axial;
  if (!(lat > 0.0) || !(ax > 0.0)) {
    throw Error(ErrorCode::InvalidGeometry, "fitted ellipse has a zero axis");
  }
  if (std::abs(lat - ax) <= tolerance * std::max(lat, ax)) {
    return InclusionGeometry::sphere(std::sqrt(lat * ax));
  }
  return InclusionGeometry::ellipsoid(lat, ax, lat);
}

void CreepSeries::validate() const {
  if (axial.size() != time.size() || lateral.size() != time.size()) {
    throw Error(ErrorCode::InvalidArgument, "creep series columns have different lengths");
  }
  for (std::size_t i = 1; i < time.size(); ++i) {
    if (!(time[i] > time[i - 1])) {
      throw Error(ErrorCode::InvalidArgument,
                  "creep timestamps must be strictly increasing (row " + std::to_string(i) + ")");
    }
  }
}

namespace {

double ls_slope(const std::vector<double>& t, const std::vector<double>& y, std::size_t begin,
                std::size_t count) {
  double mt = 0.0, my = 0.0;
  for (std::size_t i = begin; i < begin + count; ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= static_cast<double>(count);
  my /= static_cast<double>(count);
  double num = 0.0, den = 0.0;
  for (std::size_t i = begin; i < begin + count; ++i) {
    num += (t[i] - mt) * (y[i] - my);
    den += (t[i] - mt) * (t[i] - mt);
  }
  return num / den;
}

// Index of the first window start from which every later window is flat.
std::size_t flat_from(const std::vector<double>& t, const std::vector<double>& y, std::size_t w,
                      double threshold) {
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double range = *hi - *lo;
  const std::size_t last = t.size() - w;
  if (range == 0.0) return 0;
  std::size_t start = last + 1;
  for (std::size_t i = last + 1; i-- > 0;) {
    if (std::abs(ls_slope(t, y, i, w)) / range >= threshold) break;
    start = i;
  }
  return start;
}

}  // namespace

SteadyState steady_state(const CreepSeries& series, double window_fraction, double threshold) {
  series.validate();
  const std::size_t n = series.time.size();
  if (n < 10) {
    throw Error(ErrorCode::InvalidArgument,
                "creep series needs at least 10 samples, got " + std::to_string(n));
  }
  if (!(window_fraction > 0.0 && window_fraction <= 1.0) || !(threshold > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "window fraction must be in (0, 1] and threshold positive");
  }
  const std::size_t w =
      std::min(n, std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(window_fraction * n))));
  const std::size_t last = n - w;
  const std::size_t onset = std::max(flat_from(series.time, series.axial, w, threshold),
                                     flat_from(series.time, series.lateral, w, threshold));
  if (onset > last) {
    throw Error(ErrorCode::NoPlateau, "strain still changing at the end of the series");
  }
  SteadyState out;
  out.onset_index = onset;
  out.onset = series.time[onset];
  out.tail_samples = n - onset;
  for (std::size_t i = onset; i < n; ++i) {
    out.axial += series.axial[i];
    out.lateral += series.lateral[i];
  }
  out.axial /= static_cast<double>(out.tail_samples);
  out.lateral /= static_cast<double>(out.tail_samples);
  return out;
}

double rmse_percent(const StrainField& estimated, const StrainField& truth, const BitGrid& mask) {
  if (!estimated.congruent(truth) || !estimated.congruent(mask)) {
    throw Error(ErrorCode::HeaderMismatch, "RMSE grids are not congruent");
  }
  const auto& k = kernels::active();
  const kernels::MaskedMoments t = k.masked_moments(truth.span(), mask.span());
  if (t.count == 0) throw Error(ErrorCode::InvalidArgument, "RMSE mask is empty");
  if (t.sum == 0.0) throw Error(ErrorCode::ZeroTruthSum, "truth values sum to zero over the mask");
  const double sq = k.masked_sq_diff(estimated.span(), truth.span(), mask.span());
  const double n = static_cast<double>(t.count);
  return std::sqrt(sq / n) * 100.0 * n / t.sum;
}

namespace {

struct Corner {
  std::int64_t x;
  std::int64_t y;
  auto operator<=>(const Corner&) const = default;
};

std::int64_t cross(const Corner& o, const Corner& a, const Corner& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Twice the area of the convex hull (Andrew's monotone chain).
std::int64_t hull_area2(std::vector<Corner> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return 0;
  std::vector<Corner> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Corner& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  std::int64_t twice = 0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Corner& p = hull[i];
    const Corner& q = hull[(i + 1) % hull.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return twice < 0 ? -twice : twice;
}

}  // namespace

ShapeMetrics shape_metrics(const BitGrid& mask, std::size_t total_pixels, double window_area_cm2) {
  ShapeMetrics m;
  std::vector<Corner> corners;
  for (std::size_t r = 0; r < mask.rows; ++r) {
    for (std::size_t c = 0; c < mask.cols; ++c) {
      if (!mask(r, c)) continue;
      ++m.pixels;
      const auto x = static_cast<std::int64_t>(c);
      const auto y = static_cast<std::int64_t>(r);
      corners.push_back({x, y});
      corners.push_back({x + 1, y});
      corners.push_back({x, y + 1});
      corners.push_back({x + 1, y + 1});
    }
  }
  if (m.pixels == 0) throw Error(ErrorCode::InvalidArgument, "shape mask is empty");
  const std::size_t nt = total_pixels == 0 ? mask.size() : total_pixels;
  if (nt < m.pixels) {
    throw Error(ErrorCode::InvalidArgument, "total pixel count is smaller than the mask");
  }
  m.surface_area = static_cast<double>(m.pixels) * window_area_cm2 / static_cast<double>(nt);
  m.hull_area = static_cast<double>(hull_area2(std::move(corners))) / 2.0;
  m.solidity = static_cast<double>(m.pixels) / m.hull_area;
  return m;
}

}  // namespace eshelby

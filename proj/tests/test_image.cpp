#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "eshelby/error.hpp"
#include "eshelby/image.hpp"

using namespace eshelby;

namespace {

BitGrid ellipse_mask(std::size_t n, double cr, double cc, double ar, double ac) {
  BitGrid m(n, n, 1.0, 1.0, 0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double v = (r - cr) / ar, u = (c - cc) / ac;
      m(r, c) = u * u + v * v <= 1.0;
    }
  }
  return m;
}

// Gift-wrapping hull area of the pixel-square corners.
double jarvis_hull_area(const BitGrid& m) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (!m(r, c)) continue;
      for (int dr = 0; dr < 2; ++dr) {
        for (int dc = 0; dc < 2; ++dc) pts.emplace_back(double(c + dc), double(r + dr));
      }
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::size_t start = 0;
  std::vector<std::pair<double, double>> hull;
  std::size_t p = start;
  do {
    hull.push_back(pts[p]);
    std::size_t q = (p + 1) % pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double cr = (pts[q].first - pts[p].first) * (pts[i].second - pts[p].second) -
                        (pts[q].second - pts[p].second) * (pts[i].first - pts[p].first);
      const double dq = std::hypot(pts[q].first - pts[p].first, pts[q].second - pts[p].second);
      const double di = std::hypot(pts[i].first - pts[p].first, pts[i].second - pts[p].second);
      if (cr < 0.0 || (cr == 0.0 && di > dq)) q = i;
    }
    p = q;
  } while (p != start);
  double area = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area += a.first * b.second - b.first * a.second;
  }
  return std::abs(area) / 2.0;
}

}  // namespace

TEST_CASE("median filter basics") {
  StrainField f(9, 9, 1.0, 1.0, 0.3);
  CHECK(median_filter(f, 5).values == f.values);
  f(4, 4) = 10.0;
  const StrainField g = median_filter(f, 5);
  CHECK(g(4, 4) == 0.3);
  CHECK(median_filter(f, 1).values == f.values);
  CHECK_THROWS_AS(median_filter(f, 4), Error);
}

TEST_CASE("median filter stays within the input range") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  StrainField f(20, 17, 1.0, 1.0);
  for (double& v : f.values) v = u(rng);
  BitGrid labels(20, 17, 1.0, 1.0, 0);
  std::bernoulli_distribution coin(0.3);
  for (auto& v : labels.values) v = coin(rng);
  const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
  const BitGrid* const choices[] = {nullptr, &labels};
  for (const BitGrid* l : choices) {
    const StrainField g = median_filter(f, 5, l);
    for (double v : g.values) {
      CHECK(v >= *lo);
      CHECK(v <= *hi);
    }
  }
}

TEST_CASE("median filter with edge replication at the corner") {
  StrainField f(3, 3, 1.0, 1.0);
  for (std::size_t i = 0; i < 9; ++i) f.values[i] = double(i);
  // Corner window of size 3 replicates row/col 0: {0,0,1,0,0,1,3,3,4}.
  CHECK(median_filter(f, 3)(0, 0) == 1.0);
}

TEST_CASE("label-constrained median does not mix regions") {
  StrainField f(11, 11, 1.0, 1.0, 1.0);
  BitGrid labels(11, 11, 1.0, 1.0, 0);
  for (std::size_t r = 3; r < 8; ++r) {
    for (std::size_t c = 3; c < 8; ++c) {
      f(r, c) = 5.0;
      labels(r, c) = 1;
    }
  }
  const StrainField g = median_filter(f, 5, &labels);
  CHECK(g.values == f.values);
}

TEST_CASE("ellipse fit of a disk") {
  const BitGrid m = ellipse_mask(64, 31.5, 31.5, 15.0, 15.0);
  const EllipseFit e = fit_ellipse(m, 0.02, 0.02);
  CHECK(std::abs(e.semi_major - 0.3) < 0.01);
  CHECK(std::abs(e.semi_minor - 0.3) < 0.01);
  CHECK(e.center_x == doctest::Approx(31.5 * 0.02));
  CHECK_FALSE(e.degenerate);
  CHECK(geometry_from_ellipse(e).kind == InclusionKind::Sphere);
}

TEST_CASE("ellipse fit of an axis-aligned rectangle") {
  BitGrid m(40, 60, 1.0, 1.0, 0);
  for (std::size_t r = 10; r < 20; ++r) {
    for (std::size_t c = 5; c < 35; ++c) m(r, c) = 1;
  }
  const EllipseFit e = fit_ellipse(m, 1.0, 1.0);
  CHECK(e.semi_major / e.semi_minor == doctest::Approx(3.0).epsilon(0.02));
  CHECK(std::abs(e.orientation) < 1e-12);
  CHECK(e.semi_lateral > e.semi_axial);
  CHECK(e.semi_major * e.semi_minor * std::numbers::pi == doctest::Approx(300.0));
  const InclusionGeometry g = geometry_from_ellipse(e);
  CHECK(g.kind == InclusionKind::Ellipsoid);
  CHECK(g.semi_axes[0] == g.semi_axes[2]);
}

TEST_CASE("ellipse fit of a thin line is degenerate") {
  BitGrid m(5, 20, 1.0, 1.0, 0);
  for (std::size_t c = 2; c < 12; ++c) m(2, c) = 1;
  const EllipseFit e = fit_ellipse(m, 1.0, 1.0);
  CHECK(e.degenerate);
  CHECK(e.semi_minor < 1.0);
}

TEST_CASE("ellipse fit is equivariant under 90 degree rotation") {
  const BitGrid m = ellipse_mask(50, 24.0, 20.0, 8.0, 14.0);
  BitGrid rot(50, 50, 1.0, 1.0, 0);
  for (std::size_t r = 0; r < 50; ++r) {
    for (std::size_t c = 0; c < 50; ++c) rot(c, 49 - r) = m(r, c);
  }
  const EllipseFit a = fit_ellipse(m, 1.0, 1.0);
  const EllipseFit b = fit_ellipse(rot, 1.0, 1.0);
  CHECK(a.semi_major == doctest::Approx(b.semi_major));
  CHECK(a.semi_minor == doctest::Approx(b.semi_minor));
  CHECK(a.semi_lateral == doctest::Approx(b.semi_axial));
  const double d = std::remainder(b.orientation - a.orientation, std::numbers::pi);
  CHECK(std::abs(std::abs(d) - std::numbers::pi / 2.0) < 1e-9);
}

TEST_CASE("tilted ellipses warn") {
  BitGrid m(60, 60, 1.0, 1.0, 0);
  for (int r = 0; r < 60; ++r) {
    for (int c = 0; c < 60; ++c) {
      const double x = c - 30.0, y = r - 30.0;
      const double u = (x + y) / std::sqrt(2.0), v = (y - x) / std::sqrt(2.0);
      m(r, c) = (u / 20.0) * (u / 20.0) + (v / 8.0) * (v / 8.0) <= 1.0;
    }
  }
  const EllipseFit e = fit_ellipse(m, 1.0, 1.0);
  CHECK(e.orientation_warning);
  CHECK(std::abs(e.orientation) == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-6));
}

TEST_CASE("too-small masks are rejected") {
  BitGrid m(5, 5, 1.0, 1.0, 0);
  for (std::size_t i = 0; i < 9; ++i) m.values[i] = 1;
  try {
    fit_ellipse(m, 1.0, 1.0);
    FAIL("expected MaskTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MaskTooSmall);
  }
}

namespace {

CreepSeries exp_series(double tau, double t_end, double dt) {
  CreepSeries s;
  for (double t = 0.0; t <= t_end + 1e-9; t += dt) {
    s.time.push_back(t);
    s.axial.push_back(0.02 * (1.0 - std::exp(-t / tau)));
    s.lateral.push_back(0.008 * (1.0 - std::exp(-t / tau)));
  }
  return s;
}

}  // namespace

TEST_CASE("steady state of a constant series") {
  CreepSeries s;
  for (int i = 0; i < 20; ++i) {
    s.time.push_back(i * 0.5);
    s.axial.push_back(0.01);
    s.lateral.push_back(0.004);
  }
  const SteadyState ss = steady_state(s);
  CHECK(ss.axial == doctest::Approx(0.01));
  CHECK(ss.lateral == doctest::Approx(0.004));
  CHECK(ss.onset == 0.0);
}

TEST_CASE("steady state of an exponential creep curve") {
  const CreepSeries s = exp_series(8.0, 60.0, 0.5);
  const SteadyState ss = steady_state(s);
  CHECK(ss.axial == doctest::Approx(0.02).epsilon(0.01));
  CHECK(ss.lateral == doctest::Approx(0.008).epsilon(0.01));
  CHECK(ss.onset > 10.0);
  CHECK(ss.onset < 50.0);
}

TEST_CASE("steady state onset never moves earlier when the tail is truncated") {
  const CreepSeries full = exp_series(8.0, 80.0, 0.5);
  const double base = steady_state(full).onset;
  for (std::size_t drop : {10u, 20u, 40u}) {
    CreepSeries cut = full;
    cut.time.resize(cut.time.size() - drop);
    cut.axial.resize(cut.time.size());
    cut.lateral.resize(cut.time.size());
    CHECK(steady_state(cut).onset >= base);
  }
}

TEST_CASE("a linear ramp has no plateau") {
  CreepSeries s;
  for (int i = 0; i <= 60; ++i) {
    s.time.push_back(i);
    s.axial.push_back(1e-4 * i);
    s.lateral.push_back(4e-5 * i);
  }
  try {
    steady_state(s);
    FAIL("expected NoPlateau");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoPlateau);
  }
}

TEST_CASE("rmse percent") {
  StrainField t(4, 4, 1.0, 1.0, 1000.0);
  StrainField e(4, 4, 1.0, 1.0, 1100.0);
  BitGrid m(4, 4, 1.0, 1.0, 1);
  CHECK(rmse_percent(e, t, m) == 10.0);
  CHECK(rmse_percent(t, t, m) == 0.0);

  BitGrid one(4, 4, 1.0, 1.0, 0);
  one(1, 2) = 1;
  t(1, 2) = 2.0;
  e(1, 2) = 3.0;
  CHECK(rmse_percent(e, t, one) == doctest::Approx(50.0).epsilon(1e-15));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  for (double& v : e.values) v = u(rng);
  for (double& v : t.values) v = u(rng);
  const double base = rmse_percent(e, t, m);
  StrainField e2 = e, t2 = t;
  for (double& v : e2.values) v *= 37.5;
  for (double& v : t2.values) v *= 37.5;
  CHECK(rmse_percent(e2, t2, m) == doctest::Approx(base).epsilon(1e-12));

  StrainField z(4, 4, 1.0, 1.0, 0.0);
  try {
    rmse_percent(e, z, m);
    FAIL("expected ZeroTruthSum");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::ZeroTruthSum);
  }
}

TEST_CASE("shape metrics of the full grid") {
  BitGrid m(128, 128, 0.02, 0.02, 1);
  const ShapeMetrics s = shape_metrics(m);
  CHECK(s.surface_area == 16.0);
  CHECK(s.solidity == 1.0);
}

TEST_CASE("shape metrics of a plus sign") {
  BitGrid m(3, 3, 1.0, 1.0, 0);
  m(0, 1) = m(1, 0) = m(1, 1) = m(1, 2) = m(2, 1) = 1;
  const ShapeMetrics s = shape_metrics(m);
  CHECK(s.hull_area == doctest::Approx(jarvis_hull_area(m)));
  CHECK(s.solidity == doctest::Approx(5.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("hull area agrees with gift wrapping on random masks") {
  std::mt19937_64 rng(12);
  std::bernoulli_distribution coin(0.15);
  for (int t = 0; t < 20; ++t) {
    BitGrid m(15, 12, 1.0, 1.0, 0);
    for (auto& v : m.values) v = coin(rng);
    m(7, 6) = 1;
    CHECK(shape_metrics(m).hull_area == doctest::Approx(jarvis_hull_area(m)).epsilon(1e-12));
  }
}

TEST_CASE("filled ellipses are nearly convex") {
  const BitGrid m = ellipse_mask(128, 63.5, 63.5, 40.0, 60.0);
  const ShapeMetrics s = shape_metrics(m);
  CHECK(std::abs(s.solidity - 1.0) <= 0.02);
}

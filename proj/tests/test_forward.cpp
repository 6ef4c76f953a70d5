#include <doctest.h>

#include <cmath>
#include <random>

#include "eshelby/error.hpp"
#include "eshelby/forward.hpp"

using namespace eshelby;

namespace {

const InclusionGeometry kGeometries[] = {
    InclusionGeometry::sphere(0.3),
    InclusionGeometry::ellipsoid(0.4, 0.25, 0.3),
    InclusionGeometry::cylinder(0.3, 0.5, 0.2),
    InclusionGeometry::flat_ellipsoid(0.4, 0.3, 0.02),
    InclusionGeometry::penny(0.4, 0.03),
    InclusionGeometry::thin_disk(0.4, 0.02),
    InclusionGeometry::plane_strain_cylinder(0.3, 0.2)};

}  // namespace

TEST_CASE("remote strain of a uniaxial compression") {
  const MaterialParams bg{32780.0, 0.2};
  const Vec6 e = remote_strain(RemoteLoad::uniaxial(-1000.0), bg);
  CHECK(e(voigt::kAxial) == doctest::Approx(-1000.0 / 32780.0).epsilon(1e-14));
  CHECK(e(voigt::kLateral) == doctest::Approx(0.2 * 1000.0 / 32780.0).epsilon(1e-14));
  CHECK(e(voigt::kElevational) == doctest::Approx(0.2 * 1000.0 / 32780.0).epsilon(1e-14));
  CHECK(e.tail<3>().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sphere forward eigenstrain equals the generic solve") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> ue(1e3, 1e6), un(-0.3, 0.49);
  for (int t = 0; t < 100; ++t) {
    const MaterialParams incl{ue(rng), un(rng)};
    const MaterialParams bg{ue(rng), un(rng)};
    const Vec6 eps0 = remote_strain(RemoteLoad::uniaxial(-1000.0), bg);
    const EshelbyTensor s = eshelby_tensor(InclusionGeometry::sphere(1.0), bg.poissons_ratio);
    const Vec6 generic = eigenstrain_forward(s, mismatch_A(incl, bg), eps0);
    const Vec6 closed = eigenstrain_forward_sphere(bg.poissons_ratio, incl, bg, eps0);
    CHECK((closed - generic).norm() <= 1e-12 * generic.norm());
  }
}

TEST_CASE("interior stress satisfies the inclusion's own Hooke law") {
  const MaterialParams incl{97020.0, 0.45};
  const MaterialParams bg{32780.0, 0.2};
  for (const auto& g : kGeometries) {
    CAPTURE(to_string(g.kind));
    const ForwardSolution f = solve_forward(g, incl, bg, RemoteLoad::uniaxial(-1000.0));
    const Vec6 hooke = stiffness_matrix(incl) * f.strain;
    CHECK((f.stress - hooke).norm() <= 1e-9 * f.stress.norm());
  }
}

TEST_CASE("equal materials leave the field undisturbed") {
  const MaterialParams bg{32780.0, 0.2};
  const ForwardSolution f =
      solve_forward(InclusionGeometry::sphere(0.3), bg, bg, RemoteLoad::uniaxial(-1000.0));
  CHECK(f.eigenstrain.norm() == 0.0);
  CHECK((f.strain - f.remote_strain).norm() == 0.0);
}

TEST_CASE("interior axial strain decreases with inclusion stiffness") {
  const MaterialParams bg{32780.0, 0.2};
  double last = INFINITY;
  for (double ct : {0.1, 0.2, 0.5, 2.0, 3.0, 5.0, 15.0, 50.0, 100.0}) {
    const ForwardSolution f = solve_forward(InclusionGeometry::sphere(0.3), {ct * 32780.0, 0.45},
                                            bg, RemoteLoad::uniaxial(-1000.0));
    const double mag = std::abs(f.strain(voigt::kAxial));
    CHECK(mag < last);
    last = mag;
  }
}

TEST_CASE("reference phantom footprint") {
  const PhantomSpec spec;
  const Phantom ph = synth_phantom(spec, 1);
  CHECK(count_set(ph.mask) == 716);
  CHECK(ph.mask(63, 63) == 1);
  CHECK(ph.mask(0, 0) == 0);
  CHECK(ph.ym_truth(63, 63) == 97020.0);
  CHECK(ph.pr_truth(0, 0) == 0.2);
  // Compression-positive magnitudes.
  CHECK(ph.axial(0, 0) == doctest::Approx(1000.0 / 32780.0));
  CHECK(ph.lateral(0, 0) == doctest::Approx(0.2 * 1000.0 / 32780.0));
}

TEST_CASE("phantom noise is seeded and has the requested spread") {
  PhantomSpec spec;
  spec.noise_std = 1e-4;
  const Phantom a = synth_phantom(spec, 42);
  const Phantom b = synth_phantom(spec, 42);
  const Phantom c = synth_phantom(spec, 43);
  CHECK(a.axial.values == b.axial.values);
  CHECK(a.axial.values != c.axial.values);
  spec.noise_std = 0.0;
  const Phantom clean = synth_phantom(spec, 42);
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < a.axial.size(); ++i) {
    const double d = a.axial.values[i] - clean.axial.values[i];
    sum += d;
    sq += d * d;
  }
  const double n = static_cast<double>(a.axial.size());
  CHECK(std::abs(sum / n) < 4.0 * 1e-4 / std::sqrt(n));
  CHECK(std::sqrt(sq / n) == doctest::Approx(1e-4).epsilon(0.02));
}

TEST_CASE("oversized inclusions are rejected") {
  PhantomSpec spec;
  spec.geometry = InclusionGeometry::sphere(2.0);
  try {
    synth_phantom(spec, 1);
    FAIL("expected FootprintOverflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FootprintOverflow);
  }
}

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eshelby/cli.hpp"
#include "eshelby/eshelby_tensor.hpp"
#include "eshelby/forward.hpp"
#include "eshelby/image.hpp"
#include "eshelby/inverse.hpp"
#include "eshelby/io.hpp"
#include "eshelby/voigt.hpp"

using namespace eshelby;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %s: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_rel(const Matrix6& a, const Matrix6& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

double max_rel(const Vec6& a, const Vec6& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

struct Sample {
  const char* name;
  double eb, ei, nub, nui;
  double axial_kpa, lateral_kpa;
};

// Interior stress for samples A-D under 1 kPa compression.
void criterion1() {
  const Sample samples[] = {
      {"A", 32780, 97020, 0.49, 0.40, 1.437, -0.242},
      {"B", 32780, 50000, 0.49, 0.40, 1.153, -0.139},
      {"C", 32780, 163900, 0.49, 0.40, 1.614, -0.312},
      {"D", 32780, 97020, 0.45, 0.45, 1.44, -0.174},
  };
  const auto t0 = std::chrono::steady_clock::now();
  bool axial_ok = true, lateral_ok = true;
  std::string axial_detail, lateral_detail;
  for (const Sample& s : samples) {
    const ForwardSolution f = solve_forward(InclusionGeometry::sphere(0.3), {s.ei, s.nui},
                                            {s.eb, s.nub}, RemoteLoad::uniaxial(-1000.0));
    // Compression reported as positive axial stress.
    const double ax = -f.stress(voigt::kAxial) / 1000.0;
    const double lat = -f.stress(voigt::kLateral) / 1000.0;
    const double ea = std::abs(ax / s.axial_kpa - 1.0);
    const double el = std::abs(lat / s.lateral_kpa - 1.0);
    axial_ok = axial_ok && ea <= 0.01;
    lateral_ok = lateral_ok && el <= 0.01;
    axial_detail += fmt(" %s %.4f (%.2f%%)", s.name, ax, 100 * ea);
    lateral_detail += fmt(" %s %.4f (%.2f%%)", s.name, lat, 100 * el);
  }
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  report("1a (interior axial stress, 1%)", axial_ok && ms < 1000.0,
         fmt("kPa%s; %.2f ms", axial_detail.c_str(), ms));
  report("1b (interior lateral stress, 1%)", lateral_ok, "kPa" + lateral_detail);
}

struct RoundTrip {
  double ym_err = 0.0;
  double pr_err = 0.0;
  double rmse = 0.0;
  double seconds = 0.0;
  std::size_t pixels = 0;
  std::size_t invalid = 0;
};

RoundTrip round_trip(const PhantomSpec& spec, bool noisy, bool elevational, unsigned threads = 0) {
  const Phantom ph = synth_phantom(spec, 7);
  StrainField ax = ph.axial, lat = ph.lateral, el = ph.elevational;
  if (noisy) {
    ax = median_filter(ax, 5, &ph.mask);
    lat = median_filter(lat, 5, &ph.mask);
    el = median_filter(el, 5, &ph.mask);
  }
  SolverSettings settings;
  settings.threads = threads;
  settings.use_elevational = elevational;
  const StrainData data{&ax, &lat, elevational ? &el : nullptr};
  const auto t0 = std::chrono::steady_clock::now();
  const ReconstructionResult r =
      reconstruct(data, ph.mask, spec.geometry, spec.applied_stress, settings, {0, 0, 10, 10});
  RoundTrip out;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (std::size_t i = 0; i < ph.mask.size(); ++i) {
    if (!ph.mask.values[i]) continue;
    out.ym_err = std::max(out.ym_err, std::abs(r.ym_map.values[i] / spec.incl.youngs_modulus - 1));
    out.pr_err = std::max(out.pr_err, std::abs(r.pr_map.values[i] - spec.incl.poissons_ratio));
    if (std::isnan(r.ym_map.values[i])) out.ym_err = out.pr_err = INFINITY;
  }
  out.rmse = rmse_percent(r.ym_map, ph.ym_truth, ph.mask);
  out.pixels = r.inclusion_pixels;
  out.invalid = r.invalid_pixels;
  return out;
}

void criterion2() {
  const double contrasts[] = {0.1, 0.2, 0.5, 3, 5, 15, 25, 50, 100};
  bool clean_ok = true, noisy_ok = true, time_ok = true;
  std::string clean, noisy;
  double worst_time = 0.0;
  for (double ct : contrasts) {
    PhantomSpec spec;
    spec.incl = {ct * spec.bg.youngs_modulus, 0.45};
    const RoundTrip c = round_trip(spec, false, false);
    clean_ok = clean_ok && c.ym_err <= 5e-3 && c.pr_err <= 5e-3;
    clean += fmt(" %g:%.1e/%.1e", ct, c.ym_err, c.pr_err);
    spec.noise_std = 1e-4;
    const RoundTrip n = round_trip(spec, true, false);
    if (ct <= 50) noisy_ok = noisy_ok && n.rmse < 15.0;
    noisy += fmt(" %g:%.2f%%", ct, n.rmse);
    worst_time = std::max({worst_time, c.seconds, n.seconds});
    time_ok = time_ok && c.seconds < 10.0 && n.seconds < 10.0 && c.pixels > 600;
  }
  report("2a (noiseless round trip, 0.5% / 0.005)", clean_ok, "max ym/pr error" + clean);
  report("2b (noisy round trip, RMSE < 15% for contrast <= 50)", noisy_ok, "RMSE" + noisy);
  report("2c (reconstruction runtime < 10 s)", time_ok, fmt("slowest %.3f s", worst_time));
}

void criterion3() {
  const InclusionGeometry kinds[] = {
      InclusionGeometry::sphere(0.3),
      InclusionGeometry::ellipsoid(0.4, 0.25, 0.3),
      InclusionGeometry::cylinder(0.3, 0.5, 0.2),
      InclusionGeometry::penny(0.4, 0.03),
      InclusionGeometry::flat_ellipsoid(0.4, 0.3, 0.02),
      InclusionGeometry::thin_disk(0.4, 0.02),
      InclusionGeometry::plane_strain_cylinder(0.3, 0.2),
  };
  bool ok = true;
  std::string detail;
  for (const InclusionGeometry& g : kinds) {
    PhantomSpec spec;
    spec.geometry = g;
    spec.incl = {3.0 * spec.bg.youngs_modulus, 0.45};
    const RoundTrip r = round_trip(spec, false, true);
    ok = ok && r.ym_err <= 0.01 && r.pr_err <= 0.01 && r.pixels > 0 && r.invalid == 0;
    detail += fmt(" %s:%.1e", std::string(to_string(g.kind)).c_str(), std::max(r.ym_err, r.pr_err));
  }
  report("3 (all inclusion kinds at contrast 3, 1%)", ok, "max error" + detail);
}

void criterion4() {
  std::mt19937_64 rng(2024);
  constexpr double kPi = std::numbers::pi;

  double worst_i = 0.0;
  std::uniform_real_distribution<double> ua(0.1, 3.0);
  for (int t = 0; t < 50;) {
    std::array<double, 3> ax{ua(rng), ua(rng), ua(rng)};
    std::sort(ax.rbegin(), ax.rend());
    if (ax[0] / ax[1] < 1.01 || ax[1] / ax[2] < 1.01) continue;
    ++t;
    const ITerms it = i_terms_ellipsoid(ax[0], ax[1], ax[2]);
    worst_i = std::max(worst_i, std::abs(it.single[0] + it.single[1] + it.single[2] - 4 * kPi) / (4 * kPi));
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, l = (i + 2) % 3;
      const double ai2 = ax[i] * ax[i], aj2 = ax[j] * ax[j], al2 = ax[l] * ax[l];
      const double s1 = 3 * it.pair[i][i] + it.pair[i][j] + it.pair[i][l];
      const double s2 = 3 * ai2 * it.pair[i][i] + aj2 * it.pair[i][j] + al2 * it.pair[i][l];
      worst_i = std::max(worst_i, std::abs(s1 * ai2 / (4 * kPi) - 1.0));
      worst_i = std::max(worst_i, std::abs(s2 - 3 * it.single[i]) / (4 * kPi));
    }
  }

  double worst_a = 0.0, worst_eig = 0.0;
  std::uniform_real_distribution<double> ue(1e3, 1e6), un(-0.3, 0.49);
  for (int t = 0; t < 100;) {
    const MaterialParams incl{ue(rng), un(rng)}, bg{ue(rng), un(rng)};
    const Matrix6 c = stiffness_matrix(incl), c0 = stiffness_matrix(bg);
    const Eigen::FullPivLU<Matrix6> lu(c - c0);
    if (lu.rcond() < 1e-6) continue;
    ++t;
    worst_a = std::max(worst_a, max_rel(mismatch_A(incl, bg), lu.inverse() * c0));
    const InclusionGeometry g = (t % 2) ? InclusionGeometry::ellipsoid(0.5, 0.3, 0.2)
                                        : InclusionGeometry::sphere(0.3);
    const ForwardSolution f = solve_forward(g, incl, bg, RemoteLoad::uniaxial(-1000.0));
    const Vec6 eig1 = eigenstrain_inverse(f.eshelby, f.strain, f.remote_strain);
    worst_eig = std::max(worst_eig, max_rel(eig1, f.eigenstrain));
  }

  double worst_sphere = 0.0;
  std::uniform_real_distribution<double> us(-0.5, 0.49);
  for (int t = 0; t < 50; ++t) {
    const MaterialParams incl{ue(rng), us(rng)}, bg{ue(rng), us(rng)};
    const EshelbyTensor s = eshelby_tensor(InclusionGeometry::sphere(1.0), bg.poissons_ratio);
    const Vec6 eps0 = remote_strain(RemoteLoad::uniaxial(-1000.0), bg);
    const Vec6 generic = eigenstrain_forward(s, mismatch_A(incl, bg), eps0);
    const Vec6 closed = eigenstrain_forward_sphere(bg.poissons_ratio, incl, bg, eps0);
    worst_sphere = std::max(worst_sphere, max_rel(closed, generic));
    const Vec6 eps = interior_strain(eps0, s, generic);
    worst_sphere = std::max(worst_sphere,
                            max_rel(eigenstrain_inverse_sphere(bg.poissons_ratio, eps, eps0),
                                    eigenstrain_inverse(s, eps, eps0)));
  }

  report("4a (I-term identities, 1e-8)", worst_i <= 1e-8, fmt("worst %.2e over 50 ellipsoids", worst_i));
  report("4b (mismatch tensor vs numeric inverse, 1e-9)", worst_a <= 1e-9,
         fmt("worst %.2e over 100 contrasts", worst_a));
  report("4c (inverse eigenstrain equals forward at truth, 1e-10)", worst_eig <= 1e-10,
         fmt("worst %.2e", worst_eig));
  report("4d (sphere closed forms vs generic solves, 1e-12)", worst_sphere <= 1e-12,
         fmt("worst %.2e", worst_sphere));
}

BitGrid filled_ellipse(std::size_t n, double ra, double rb) {
  BitGrid m(n, n, 1.0, 1.0, 0);
  const double c = (static_cast<double>(n) - 1.0) / 2.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t q = 0; q < n; ++q) {
      const double x = (q - c) / ra, y = (r - c) / rb;
      m(r, q) = x * x + y * y <= 1.0;
    }
  }
  return m;
}

void criterion5() {
  StrainField truth(32, 32, 1.0, 1.0, 1000.0);
  StrainField est(32, 32, 1.0, 1.0, 1100.0);
  BitGrid mask(32, 32, 1.0, 1.0, 0);
  for (std::size_t r = 8; r < 24; ++r) {
    for (std::size_t c = 4; c < 30; ++c) mask(r, c) = 1;
  }
  const double rmse = rmse_percent(est, truth, mask);
  report("5a (uniform 10% error gives RMSE 10.0)", rmse == 10.0, fmt("%.17g", rmse));

  io::SensorLog log;
  for (int i = 0; i < 20; ++i) {
    log.time.push_back(i);
    log.reading.push_back(255);
  }
  const double stress = io::sensor_to_stress(log).mean;
  report("5b (full-scale sensor reading, 61684 +/- 1 Pa)", std::abs(stress - 61684.0) <= 1.0,
         fmt("%.3f Pa", stress));

  CreepSeries series;
  for (int i = 0; i <= 600; ++i) {
    const double t = 0.1 * i;
    series.time.push_back(t);
    series.axial.push_back(0.02 * (1.0 - std::exp(-t / 8.0)));
    series.lateral.push_back(0.008 * (1.0 - std::exp(-t / 8.0)));
  }
  const SteadyState ss = steady_state(series);
  const double ea = std::abs(ss.axial / 0.02 - 1.0), el = std::abs(ss.lateral / 0.008 - 1.0);
  report("5c (steady state of a tau = 8 s creep, 1%)", ea <= 0.01 && el <= 0.01,
         fmt("axial %.3f%%, lateral %.3f%%, onset %.1f s", 100 * ea, 100 * el, ss.onset));

  bool sol_ok = true;
  std::string detail;
  for (auto [n, ra, rb] : {std::tuple{160, 60.0, 60.0}, {160, 60.0, 40.0}, {200, 90.0, 50.0}}) {
    const double s = shape_metrics(filled_ellipse(n, ra, rb)).solidity;
    sol_ok = sol_ok && std::abs(s - 1.0) <= 0.02;
    detail += fmt(" %gx%g:%.4f", ra, rb, s);
  }
  report("5d (filled-ellipse solidity 1 +/- 0.02)", sol_ok, "solidity" + detail);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "eshelby-recon");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  return cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
}

void criterion6() {
  PhantomSpec spec;
  spec.incl = {5.0 * spec.bg.youngs_modulus, 0.42};
  spec.noise_std = 1e-4;
  const Phantom ph = synth_phantom(spec, 99);
  const StrainData data{&ph.axial, &ph.lateral, nullptr};
  bool maps_ok = true;
  SolverSettings one;
  one.threads = 1;
  const ReconstructionResult ref =
      reconstruct(data, ph.mask, spec.geometry, 1000.0, one, {0, 0, 10, 10});
  for (unsigned n : {2u, 3u, 8u, 0u}) {
    SolverSettings many;
    many.threads = n;
    const ReconstructionResult r =
        reconstruct(data, ph.mask, spec.geometry, 1000.0, many, {0, 0, 10, 10});
    maps_ok = maps_ok &&
              std::memcmp(r.ym_map.values.data(), ref.ym_map.values.data(),
                          ref.ym_map.size() * sizeof(double)) == 0 &&
              std::memcmp(r.pr_map.values.data(), ref.pr_map.values.data(),
                          ref.pr_map.size() * sizeof(double)) == 0 &&
              r.validity.values == ref.validity.values;
  }
  report("6a (1 vs N threads give bit-identical maps)", maps_ok, "threads 1, 2, 3, 8, auto");

  const fs::path root = fs::temp_directory_path() / "eshelby_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "phantom.cfg") << "noise_std = 1e-4\ninclusion_ym = 160000\n";
  std::ofstream(root / "run.cfg") << "applied_stress_pa = 1000\nmedian_filter_size = 5\nthreads = 0\n";
  {
    std::ofstream log(root / "log.txt");
    for (int i = 0; i < 50; ++i) log << 0.1 * i << ' ' << (8 + i % 3) << '\n';
    std::ofstream creep(root / "creep.txt");
    for (int i = 0; i <= 120; ++i) {
      const double t = 0.5 * i;
      creep << t << ' ' << 0.02 * (1 - std::exp(-t / 8)) << ' ' << 0.008 * (1 - std::exp(-t / 8)) << '\n';
    }
  }
  bool cli_ok = true;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = root / ("run" + std::to_string(run));
    const std::string d = dir.string();
    const std::string r = root.string();
    std::vector<std::vector<std::string>> cmds = {
        {"forward", "--config", r + "/phantom.cfg", "--out", d + "/data", "--seed", "5"},
        {"reconstruct", "--config", r + "/run.cfg", "--axial", d + "/data/axial.grid", "--lateral",
         d + "/data/lateral.grid", "--mask", d + "/data/mask.grid", "--out", d + "/recon"},
        {"stress", "--log", r + "/log.txt", "--out", d + "/stress"},
        {"steady-state", "--series", r + "/creep.txt", "--out", d + "/steady"},
        {"metrics", "--mask", d + "/data/mask.grid", "--estimated", d + "/recon/ym_map.grid",
         "--truth", d + "/data/ym_true.grid", "--out", d + "/metrics"},
    };
    for (auto& c : cmds) cli_ok = cli_ok && run_cli(c) == 0;
  }
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "run0")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), root / "run0");
    cli_ok = cli_ok && fs::exists(root / "run1" / rel) &&
             slurp(e.path()) == slurp(root / "run1" / rel);
    ++files;
  }
  cli_ok = cli_ok && files >= 12;
  report("6b (CLI subcommands byte-reproducible)", cli_ok, fmt("%zu output files compared", files));
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  std::printf("%s: %d failing line(s)\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}

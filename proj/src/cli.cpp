#include "eshelby/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "eshelby/error.hpp"
#include "eshelby/forward.hpp"
#include "eshelby/image.hpp"
#include "eshelby/inverse.hpp"
#include "eshelby/io.hpp"

namespace eshelby::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// key = value report lines, echoed to the console and optionally saved.
class Report {
 public:
  void add(const std::string& key, const std::string& value) {
    text_ += key + " = " + value + "\n";
  }
  void add(const std::string& key, double value) { add(key, num(value)); }
  void add_count(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }

  void emit(std::ostream& out, const std::optional<fs::path>& file) const {
    out << text_;
    if (file) {
      std::ofstream f(*file, std::ios::binary);
      if (!f) throw Error(ErrorCode::Io, "cannot write " + file->string());
      f << text_;
    }
  }

 private:
  std::string text_;
};

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir + ": " + ec.message());
  return p;
}

std::optional<fs::path> report_path(const std::string& out_dir, const char* name) {
  if (out_dir.empty()) return std::nullopt;
  return prepare_out_dir(out_dir) / name;
}

struct MaskStats {
  double mean = std::nan("");
  double sd = std::nan("");
  std::size_t n = 0;
};

MaskStats masked_stats(const StrainField& f, const BitGrid& mask, const BitGrid& valid) {
  MaskStats s;
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!mask.values[i] || !valid.values[i]) continue;
    sum += f.values[i];
    ++s.n;
  }
  if (s.n == 0) return s;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!mask.values[i] || !valid.values[i]) continue;
    ss += (f.values[i] - s.mean) * (f.values[i] - s.mean);
  }
  s.sd = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
  return s;
}

std::string axes_text(const InclusionGeometry& g) {
  return num(g.semi_axes[0]) + "," + num(g.semi_axes[1]) + "," + num(g.semi_axes[2]);
}

io::RunConfig load_run_config(const std::string& path) {
  if (path.empty()) {
    throw Error(ErrorCode::InvalidConfig, "reconstruct needs --config with a stress source");
  }
  const fs::path p(path);
  return io::parse_run_config(io::read_key_values(p), p.parent_path());
}

int cmd_forward(const std::string& config, const std::string& out_dir, std::uint64_t seed,
                std::ostream& out) {
  PhantomSpec spec;
  if (!config.empty()) spec = io::parse_phantom_config(io::read_key_values(fs::path(config)));
  const Phantom ph = synth_phantom(spec, seed);
  const fs::path dir = prepare_out_dir(out_dir);
  io::write_grid(dir / "axial.grid", ph.axial);
  io::write_grid(dir / "lateral.grid", ph.lateral);
  io::write_grid(dir / "elevational.grid", ph.elevational);
  io::write_mask(dir / "mask.grid", ph.mask);
  io::write_grid(dir / "ym_true.grid", ph.ym_truth);
  io::write_grid(dir / "pr_true.grid", ph.pr_truth);

  Report r;
  r.add("geometry", std::string(to_string(spec.geometry.kind)));
  r.add("semi_axes_cm", axes_text(spec.geometry));
  r.add_count("inclusion_pixels", count_set(ph.mask));
  r.add("interior_axial_strain", -ph.interior.strain(voigt::kAxial));
  r.add("interior_lateral_strain", ph.interior.strain(voigt::kLateral));
  r.add("interior_axial_stress_pa", -ph.interior.stress(voigt::kAxial));
  r.add("interior_lateral_stress_pa", -ph.interior.stress(voigt::kLateral));
  r.add("noise_std", spec.noise_std);
  r.add_count("seed", seed);
  r.emit(out, dir / "phantom.txt");
  return 0;
}

int cmd_reconstruct(const std::string& config, const io::DatasetPaths& paths,
                    const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const io::RunConfig cfg = load_run_config(config);
  const io::Dataset data = io::parse_dataset(paths, cfg);

  double sigma_a = 0.0;
  std::string stress_source;
  if (cfg.applied_stress_pa) {
    sigma_a = *cfg.applied_stress_pa;
    stress_source = "config";
  } else {
    const io::StressEstimate s = io::sensor_to_stress(io::read_sensor_log(*cfg.sensor_log_path));
    sigma_a = s.mean;
    stress_source = "sensor_log (sd " + num(s.std) + " Pa, " + std::to_string(s.samples) +
                    " readings)";
  }

  const double dx = data.axial.dx;
  const double dy = data.axial.dy;
  std::optional<EllipseFit> fit;
  try {
    fit = fit_ellipse(data.mask, dx, dy);
  } catch (const Error& e) {
    const bool needed = cfg.geometry_mode == io::GeometryMode::AutoEllipse;
    if (needed || e.code() != ErrorCode::MaskTooSmall) throw;
  }
  const InclusionGeometry geom = cfg.geometry_mode == io::GeometryMode::AutoEllipse
                                     ? geometry_from_ellipse(*fit)
                                     : cfg.geometry;
  if (fit && fit->orientation_warning) {
    err << "warning: inclusion tilted " << num(fit->orientation)
        << " rad from the image axes; only the axis lengths are used\n";
  }

  StrainData strains;
  strains.axial = &data.axial;
  strains.lateral = &data.lateral;
  strains.elevational = data.elevational ? &*data.elevational : nullptr;
  const ReconstructionResult res =
      reconstruct(strains, data.mask, geom, sigma_a, cfg.solver, cfg.background_window);

  const fs::path dir = prepare_out_dir(out_dir);
  io::write_grid(dir / "ym_map.grid", res.ym_map);
  io::write_grid(dir / "pr_map.grid", res.pr_map);
  io::write_mask(dir / "validity.grid", res.validity);

  const ShapeMetrics shape = shape_metrics(data.mask, 0, cfg.window_area_cm2);
  const MaskStats ym = masked_stats(res.ym_map, data.mask, res.validity);
  const MaskStats pr = masked_stats(res.pr_map, data.mask, res.validity);
  std::size_t iter_sum = 0, invalid_inside = 0;
  for (std::size_t i = 0; i < data.mask.size(); ++i) {
    if (!data.mask.values[i]) continue;
    iter_sum += static_cast<std::size_t>(res.iterations.values[i]);
    invalid_inside += res.validity.values[i] == 0;
  }

  Report r;
  r.add("applied_stress_pa", sigma_a);
  r.add("stress_source", stress_source);
  r.add("strain_convention",
        res.background.convention == StrainConvention::Magnitude ? "magnitude" : "signed");
  const PixelWindow& w = cfg.background_window;
  r.add("background_window", std::to_string(w.row) + "," + std::to_string(w.col) + "," +
                                 std::to_string(w.height) + "," + std::to_string(w.width));
  r.add("background_ym_pa", res.background.params.youngs_modulus);
  r.add("background_pr", res.background.params.poissons_ratio);
  r.add("background_pr_used", res.nu_b_used);
  if (res.background.poisson_out_of_range) r.add("background_pr_warning", "clamped");
  r.add("geometry", std::string(to_string(geom.kind)));
  r.add("geometry_mode", cfg.geometry_mode == io::GeometryMode::AutoEllipse ? "auto" : "explicit");
  r.add("semi_axes_cm", axes_text(geom));
  if (fit) {
    r.add("ellipse_center_cm", num(fit->center_x) + "," + num(fit->center_y));
    r.add("ellipse_semi_axes_cm", num(fit->semi_major) + "," + num(fit->semi_minor));
    r.add("ellipse_orientation_rad", fit->orientation);
    if (fit->degenerate) r.add("ellipse_warning", "degenerate minor axis");
  }
  r.add("solidity", shape.solidity);
  r.add("surface_area_cm2", shape.surface_area);
  r.add_count("inclusion_pixels", res.inclusion_pixels);
  r.add("ym_mean_pa", ym.mean);
  r.add("ym_sd_pa", ym.sd);
  r.add("pr_mean", pr.mean);
  r.add("pr_sd", pr.sd);
  r.add("ctym", ym.mean / res.background.params.youngs_modulus);
  r.add("ctpr", pr.mean / res.background.params.poissons_ratio);
  r.add("mean_iterations", res.inclusion_pixels
                               ? static_cast<double>(iter_sum) / static_cast<double>(res.inclusion_pixels)
                               : 0.0);
  r.add_count("not_converged_pixels", res.not_converged_pixels);
  r.add_count("bound_hit_pixels", res.bound_hit_pixels);
  r.add_count("invalid_inclusion_pixels", invalid_inside);
  r.add_count("invalid_pixels", res.invalid_pixels);
  r.emit(out, dir / "report.txt");
  return 0;
}

int cmd_stress(const std::string& log_path, const std::string& out_dir, std::ostream& out) {
  const io::StressEstimate s = io::sensor_to_stress(io::read_sensor_log(fs::path(log_path)));
  Report r;
  r.add("mean_stress_pa", s.mean);
  r.add("std_stress_pa", s.std);
  r.add_count("samples", s.samples);
  r.emit(out, report_path(out_dir, "stress.txt"));
  return 0;
}

int cmd_steady(const std::string& series_path, double fraction, double threshold,
               const std::string& out_dir, std::ostream& out) {
  const SteadyState s =
      steady_state(io::read_creep_series(fs::path(series_path)), fraction, threshold);
  Report r;
  r.add("axial_strain", s.axial);
  r.add("lateral_strain", s.lateral);
  r.add("onset_s", s.onset);
  r.add_count("tail_samples", s.tail_samples);
  r.emit(out, report_path(out_dir, "steady_state.txt"));
  return 0;
}

int cmd_metrics(const std::string& estimated, const std::string& truth, const std::string& mask,
                double window_area, std::size_t total_pixels, const std::string& out_dir,
                std::ostream& out) {
  const BitGrid m = io::read_mask(fs::path(mask));
  Report r;
  if (!estimated.empty() || !truth.empty()) {
    if (estimated.empty() || truth.empty()) {
      throw Error(ErrorCode::InvalidArgument, "--estimated and --truth must be given together");
    }
    const StrainField e = io::read_grid(fs::path(estimated));
    const StrainField t = io::read_grid(fs::path(truth));
    r.add("rmse_percent", rmse_percent(e, t, m));
  }
  const ShapeMetrics s = shape_metrics(m, total_pixels, window_area);
  r.add_count("pixels", s.pixels);
  r.add("surface_area_cm2", s.surface_area);
  r.add("solidity", s.solidity);
  r.add("hull_area_px", s.hull_area);
  r.emit(out, report_path(out_dir, "metrics.txt"));
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Eshelby-inclusion elastography: phantoms, reconstruction and metrics",
               "eshelby-recon"};
  app.require_subcommand(1);

  std::string config, out_dir, axial, lateral, elevational, mask;
  std::string log_path, series_path, estimated, truth;
  std::uint64_t seed = 1;
  double fraction = 0.1;
  double threshold = kPlateauSlope;
  double window_area = kWindowAreaCm2;
  std::size_t total_pixels = 0;

  CLI::App* forward = app.add_subcommand("forward", "Generate a synthetic phantom");
  forward->add_option("--config", config, "Phantom key=value file");
  forward->add_option("--out", out_dir, "Output directory")->required();
  forward->add_option("--seed", seed, "Noise seed");

  CLI::App* recon = app.add_subcommand("reconstruct", "Per-pixel YM/PR reconstruction");
  recon->add_option("--config", config, "Run key=value file")->required();
  recon->add_option("--axial", axial, "Axial strain grid")->required();
  recon->add_option("--lateral", lateral, "Lateral strain grid")->required();
  recon->add_option("--elevational", elevational, "Elevational strain grid");
  recon->add_option("--mask", mask, "Inclusion mask grid");
  recon->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* stress = app.add_subcommand("stress", "Force-sensor log to applied stress");
  stress->add_option("--log", log_path, "Sensor log (time reading)")->required();
  stress->add_option("--out", out_dir, "Output directory");

  CLI::App* steady = app.add_subcommand("steady-state", "Plateau strains of a creep series");
  steady->add_option("--series", series_path, "Creep series (time axial lateral)")->required();
  steady->add_option("--window-fraction", fraction, "Slope window as a fraction of the series");
  steady->add_option("--threshold", threshold, "Slope threshold in range fractions per second");
  steady->add_option("--out", out_dir, "Output directory");

  CLI::App* metrics = app.add_subcommand("metrics", "RMSE, solidity and surface area");
  metrics->add_option("--estimated", estimated, "Estimated grid");
  metrics->add_option("--truth", truth, "Ground-truth grid");
  metrics->add_option("--mask", mask, "Mask grid")->required();
  metrics->add_option("--window-area", window_area, "Imaging window area in cm^2");
  metrics->add_option("--total-pixels", total_pixels, "Pixels in the imaging window (0 = grid)");
  metrics->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*forward) return cmd_forward(config, out_dir, seed, out);
    if (*recon) {
      io::DatasetPaths paths;
      paths.axial = axial;
      paths.lateral = lateral;
      if (!elevational.empty()) paths.elevational = fs::path(elevational);
      if (!mask.empty()) paths.mask = fs::path(mask);
      return cmd_reconstruct(config, paths, out_dir, out, err);
    }
    if (*stress) return cmd_stress(log_path, out_dir, out);
    if (*steady) return cmd_steady(series_path, fraction, threshold, out_dir, out);
    if (*metrics) {
      return cmd_metrics(estimated, truth, mask, window_area, total_pixels, out_dir, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

}  // namespace eshelby::cli

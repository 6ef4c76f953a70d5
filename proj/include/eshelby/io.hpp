#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eshelby/eshelby_tensor.hpp"
#include "eshelby/forward.hpp"
#include "eshelby/grid.hpp"
#include "eshelby/image.hpp"
#include "eshelby/inverse.hpp"

namespace eshelby::io {

// Grid files: optional '#' comment lines, a header "rows cols dx dy" and
// then `rows` lines of `cols` values. Values are written with 17
// significant digits so a write/read cycle is bit-exact; "nan" is allowed.

void write_grid(std::ostream& os, const StrainField& g);
void write_grid(const std::filesystem::path& path, const StrainField& g);
void write_mask(const std::filesystem::path& path, const BitGrid& g);

/// `source` names the input in error messages. Throws MalformedGrid.
StrainField read_grid(std::istream& is, const std::string& source = "<stream>");
StrainField read_grid(const std::filesystem::path& path);
/// Grid whose values must all be 0 or 1.
BitGrid read_mask(const std::filesystem::path& path);

std::string format_double(double v);

/// Flat key=value file; '#' starts a comment. Throws InvalidConfig on
/// malformed lines and duplicate keys.
struct KeyValues {
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(const std::string& key) const;
};
KeyValues read_key_values(std::istream& is, const std::string& source = "<stream>");
KeyValues read_key_values(const std::filesystem::path& path);

enum class GeometryMode { AutoEllipse, Explicit };

struct RunConfig {
  std::optional<double> applied_stress_pa;
  std::optional<std::filesystem::path> sensor_log_path;
  GeometryMode geometry_mode = GeometryMode::AutoEllipse;
  InclusionGeometry geometry = InclusionGeometry::sphere(1.0);
  PixelWindow background_window{0, 0, 10, 10};
  std::size_t median_filter_size = 0;
  double window_area_cm2 = kWindowAreaCm2;
  SolverSettings solver;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Keys: applied_stress_pa | sensor_log, geometry (auto or a kind name),
/// semi_axes (x,y,z in cm), background_window (row,col,height,width),
/// median_filter_size, use_elevational, window_area_cm2, max_iterations,
/// step_tolerance, residual_tolerance, ym_bound_low, ym_bound_high,
/// pr_lower_factor, pr_upper, threads. Relative sensor_log paths resolve
/// against `base_dir`.
RunConfig parse_run_config(const KeyValues& kv, const std::filesystem::path& base_dir = {});

/// Keys: rows, cols, dx, dy, geometry, semi_axes, center_row, center_col,
/// inclusion_ym, inclusion_pr, background_ym, background_pr,
/// applied_stress_pa, noise_std.
PhantomSpec parse_phantom_config(const KeyValues& kv);

struct SensorLog {
  std::vector<double> time;  // s
  std::vector<int> reading;  // 0..255
};

inline constexpr double kSensorFullScaleN = 4.4;
inline constexpr int kSensorLevels = 255;
inline constexpr double kSensorAreaM2 = 7.1331e-5;

/// Two columns: time reading. Throws ReadingOutOfRange, MalformedGrid.
SensorLog read_sensor_log(std::istream& is, const std::string& source = "<stream>");
SensorLog read_sensor_log(const std::filesystem::path& path);

struct StressEstimate {
  double mean = 0.0;  // Pa
  double std = 0.0;   // Pa, sample standard deviation
  std::size_t samples = 0;
};

/// Throws EmptyLog, ReadingOutOfRange.
StressEstimate sensor_to_stress(const SensorLog& log);

/// Three columns: time axial lateral.
CreepSeries read_creep_series(std::istream& is, const std::string& source = "<stream>");
CreepSeries read_creep_series(const std::filesystem::path& path);

struct DatasetPaths {
  std::filesystem::path axial;
  std::filesystem::path lateral;
  std::optional<std::filesystem::path> elevational;
  std::optional<std::filesystem::path> mask;
};

struct Dataset {
  StrainField axial;
  StrainField lateral;
  std::optional<StrainField> elevational;
  BitGrid mask;
  RunConfig config;
};

/// Loads and cross-checks the grids and applies the configured median
/// filter (constrained to the mask labels). Throws HeaderMismatch,
/// MalformedGrid, MissingMask.
Dataset parse_dataset(const DatasetPaths& paths, const RunConfig& config);

}  // namespace eshelby::io

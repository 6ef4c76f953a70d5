#include "eshelby/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "eshelby/error.hpp"

namespace eshelby::io {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string_view strip_comment(std::string_view s) {
  const auto hash = s.find('#');
  return trim(hash == std::string_view::npos ? s : s.substr(0, hash));
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

bool parse_double(std::string_view tok, double& v) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

template <class Int>
bool parse_int(std::string_view tok, Int& v) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

// Non-empty, comment-stripped lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> content_lines(std::istream& is) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    const std::string_view body = strip_comment(line);
    if (!body.empty()) out.emplace_back(n, std::string(body));
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

void write_grid(std::ostream& os, const StrainField& g) {
  os << g.rows << ' ' << g.cols << ' ' << format_double(g.dx) << ' ' << format_double(g.dy)
     << '\n';
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t c = 0; c < g.cols; ++c) {
      if (c) os << ' ';
      os << format_double(g(r, c));
    }
    os << '\n';
  }
}

void write_grid(const fs::path& path, const StrainField& g) {
  std::ofstream out = open_out(path);
  write_grid(out, g);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

void write_mask(const fs::path& path, const BitGrid& g) {
  StrainField f(g.rows, g.cols, g.dx, g.dy);
  for (std::size_t i = 0; i < g.size(); ++i) f.values[i] = g.values[i] ? 1.0 : 0.0;
  write_grid(path, f);
}

StrainField read_grid(std::istream& is, const std::string& source) {
  const auto lines = content_lines(is);
  if (lines.empty()) throw Error(ErrorCode::MalformedGrid, source + ": missing header");
  const auto& [hline, htext] = lines.front();
  const auto head = split_ws(htext);
  std::size_t rows = 0, cols = 0;
  double dx = 0.0, dy = 0.0;
  if (head.size() != 4 || !parse_int(head[0], rows) || !parse_int(head[1], cols) ||
      !parse_double(head[2], dx) || !parse_double(head[3], dy)) {
    throw Error(ErrorCode::MalformedGrid,
                where(source, hline) + ": header must be 'rows cols dx dy'");
  }
  if (rows == 0 || cols == 0 || !(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) ||
      !std::isfinite(dy)) {
    throw Error(ErrorCode::MalformedGrid,
                where(source, hline) + ": header needs positive sizes and spacing");
  }
  if (lines.size() - 1 != rows) {
    throw Error(ErrorCode::MalformedGrid, source + ": expected " + std::to_string(rows) +
                                              " rows, found " + std::to_string(lines.size() - 1));
  }
  StrainField g(rows, cols, dx, dy);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& [ln, text] = lines[r + 1];
    const auto toks = split_ws(text);
    if (toks.size() != cols) {
      throw Error(ErrorCode::MalformedGrid, where(source, ln) + ": expected " +
                                                std::to_string(cols) + " values, found " +
                                                std::to_string(toks.size()));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!parse_double(toks[c], g(r, c))) {
        throw Error(ErrorCode::MalformedGrid,
                    where(source, ln) + ": bad value '" + std::string(toks[c]) + "'");
      }
    }
  }
  return g;
}

StrainField read_grid(const fs::path& path) {
  std::ifstream in = open_in(path);
  return read_grid(in, path.string());
}

BitGrid read_mask(const fs::path& path) {
  const StrainField f = read_grid(path);
  BitGrid m(f.rows, f.cols, f.dx, f.dy);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = f.values[i];
    if (v != 0.0 && v != 1.0) {
      throw Error(ErrorCode::MalformedGrid, path.string() + ": mask value " + format_double(v) +
                                                " at index " + std::to_string(i) +
                                                " is not 0 or 1");
    }
    m.values[i] = v != 0.0;
  }
  return m;
}

const std::string* KeyValues::find(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

KeyValues read_key_values(std::istream& is, const std::string& source) {
  KeyValues kv;
  for (const auto& [ln, text] : content_lines(is)) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, where(source, ln) + ": expected key=value");
    }
    std::string key(trim(std::string_view(text).substr(0, eq)));
    std::string value(trim(std::string_view(text).substr(eq + 1)));
    if (key.empty()) throw Error(ErrorCode::InvalidConfig, where(source, ln) + ": empty key");
    if (kv.find(key) != nullptr) {
      throw Error(ErrorCode::InvalidConfig, where(source, ln) + ": duplicate key '" + key + "'");
    }
    kv.entries.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

KeyValues read_key_values(const fs::path& path) {
  std::ifstream in = open_in(path);
  return read_key_values(in, path.string());
}

namespace {

double as_double(const std::string& key, const std::string& v) {
  double d = 0.0;
  if (!parse_double(v, d) || !std::isfinite(d)) {
    throw Error(ErrorCode::InvalidConfig, key + ": '" + v + "' is not a finite number");
  }
  return d;
}

std::size_t as_count(const std::string& key, const std::string& v) {
  std::size_t n = 0;
  if (!parse_int(std::string_view(v), n)) {
    throw Error(ErrorCode::InvalidConfig, key + ": '" + v + "' is not a non-negative integer");
  }
  return n;
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::InvalidConfig, key + ": '" + v + "' is not a boolean");
}

std::vector<double> as_list(const std::string& key, const std::string& v, std::size_t n) {
  std::vector<double> out;
  std::string_view rest(v);
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(as_double(key, std::string(trim(rest.substr(0, comma)))));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.size() != n) {
    throw Error(ErrorCode::InvalidConfig,
                key + ": expected " + std::to_string(n) + " comma-separated values");
  }
  return out;
}

void reject_unknown(const KeyValues& kv, std::initializer_list<std::string_view> known) {
  for (const auto& [k, v] : kv.entries) {
    bool ok = false;
    for (auto name : known) ok = ok || k == name;
    if (!ok) throw Error(ErrorCode::InvalidConfig, "unknown key '" + k + "'");
  }
}

InclusionGeometry explicit_geometry(const std::string& kind, const KeyValues& kv) {
  const std::string* axes = kv.find("semi_axes");
  if (axes == nullptr) {
    throw Error(ErrorCode::InvalidConfig, "geometry '" + kind + "' needs semi_axes=x,y,z");
  }
  const auto a = as_list("semi_axes", *axes, 3);
  InclusionGeometry g;
  try {
    g.kind = inclusion_kind_from_string(kind);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  g.semi_axes = {a[0], a[1], a[2]};
  g.validate();
  return g;
}

}  // namespace

void RunConfig::validate() const {
  if (applied_stress_pa.has_value() == sensor_log_path.has_value()) {
    throw Error(ErrorCode::InvalidConfig,
                "exactly one of applied_stress_pa and sensor_log must be given");
  }
  if (applied_stress_pa && !(*applied_stress_pa != 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "applied_stress_pa must be nonzero");
  }
  if (median_filter_size != 0 && median_filter_size % 2 == 0) {
    throw Error(ErrorCode::InvalidConfig, "median_filter_size must be 0 or odd");
  }
  if (!(window_area_cm2 > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "window_area_cm2 must be positive");
  }
  if (background_window.height == 0 || background_window.width == 0) {
    throw Error(ErrorCode::InvalidConfig, "background_window must be non-empty");
  }
  solver.validate();
}

RunConfig parse_run_config(const KeyValues& kv, const fs::path& base_dir) {
  reject_unknown(kv, {"applied_stress_pa", "sensor_log", "geometry", "semi_axes",
                      "background_window", "median_filter_size", "use_elevational",
                      "window_area_cm2", "max_iterations", "step_tolerance", "residual_tolerance",
                      "ym_bound_low", "ym_bound_high", "pr_lower_factor", "pr_upper", "threads"});
  RunConfig c;
  if (auto* v = kv.find("applied_stress_pa")) c.applied_stress_pa = as_double("applied_stress_pa", *v);
  if (auto* v = kv.find("sensor_log")) {
    fs::path p(*v);
    c.sensor_log_path = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }
  if (auto* v = kv.find("geometry"); v != nullptr && *v != "auto") {
    c.geometry_mode = GeometryMode::Explicit;
    c.geometry = explicit_geometry(*v, kv);
  } else if (kv.find("semi_axes") != nullptr) {
    throw Error(ErrorCode::InvalidConfig, "semi_axes needs an explicit geometry kind");
  }
  if (auto* v = kv.find("background_window")) {
    const auto w = as_list("background_window", *v, 4);
    for (double x : w) {
      if (x < 0.0 || x != std::floor(x)) {
        throw Error(ErrorCode::InvalidConfig, "background_window entries must be whole pixels");
      }
    }
    c.background_window = {static_cast<std::size_t>(w[0]), static_cast<std::size_t>(w[1]),
                           static_cast<std::size_t>(w[2]), static_cast<std::size_t>(w[3])};
  }
  if (auto* v = kv.find("median_filter_size")) c.median_filter_size = as_count("median_filter_size", *v);
  if (auto* v = kv.find("use_elevational")) c.solver.use_elevational = as_bool("use_elevational", *v);
  if (auto* v = kv.find("window_area_cm2")) c.window_area_cm2 = as_double("window_area_cm2", *v);
  if (auto* v = kv.find("max_iterations")) {
    c.solver.max_iterations = static_cast<int>(as_count("max_iterations", *v));
  }
  if (auto* v = kv.find("step_tolerance")) c.solver.step_tolerance = as_double("step_tolerance", *v);
  if (auto* v = kv.find("residual_tolerance")) {
    c.solver.residual_tolerance = as_double("residual_tolerance", *v);
  }
  if (auto* v = kv.find("ym_bound_low")) c.solver.ym_bound_low = as_double("ym_bound_low", *v);
  if (auto* v = kv.find("ym_bound_high")) c.solver.ym_bound_high = as_double("ym_bound_high", *v);
  if (auto* v = kv.find("pr_lower_factor")) c.solver.pr_lower_factor = as_double("pr_lower_factor", *v);
  if (auto* v = kv.find("pr_upper")) c.solver.pr_upper = as_double("pr_upper", *v);
  if (auto* v = kv.find("threads")) c.solver.threads = static_cast<unsigned>(as_count("threads", *v));
  c.validate();
  return c;
}

PhantomSpec parse_phantom_config(const KeyValues& kv) {
  reject_unknown(kv, {"rows", "cols", "dx", "dy", "geometry", "semi_axes", "center_row",
                      "center_col", "inclusion_ym", "inclusion_pr", "background_ym",
                      "background_pr", "applied_stress_pa", "noise_std"});
  PhantomSpec s;
  if (auto* v = kv.find("rows")) s.rows = as_count("rows", *v);
  if (auto* v = kv.find("cols")) s.cols = as_count("cols", *v);
  if (auto* v = kv.find("dx")) s.dx = as_double("dx", *v);
  if (auto* v = kv.find("dy")) s.dy = as_double("dy", *v);
  if (auto* v = kv.find("geometry")) {
    s.geometry = explicit_geometry(*v, kv);
  } else if (kv.find("semi_axes") != nullptr) {
    throw Error(ErrorCode::InvalidConfig, "semi_axes needs a geometry kind");
  }
  if (auto* v = kv.find("center_row")) s.center_row = as_double("center_row", *v);
  if (auto* v = kv.find("center_col")) s.center_col = as_double("center_col", *v);
  if (auto* v = kv.find("inclusion_ym")) s.incl.youngs_modulus = as_double("inclusion_ym", *v);
  if (auto* v = kv.find("inclusion_pr")) s.incl.poissons_ratio = as_double("inclusion_pr", *v);
  if (auto* v = kv.find("background_ym")) s.bg.youngs_modulus = as_double("background_ym", *v);
  if (auto* v = kv.find("background_pr")) s.bg.poissons_ratio = as_double("background_pr", *v);
  if (auto* v = kv.find("applied_stress_pa")) s.applied_stress = as_double("applied_stress_pa", *v);
  if (auto* v = kv.find("noise_std")) s.noise_std = as_double("noise_std", *v);
  if (s.rows == 0 || s.cols == 0 || !(s.dx > 0.0) || !(s.dy > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "phantom grid needs positive rows, cols, dx and dy");
  }
  if (!(s.applied_stress > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "applied_stress_pa must be a positive magnitude");
  }
  if (!(s.noise_std >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise_std must be >= 0");
  s.incl.validate();
  s.bg.validate();
  return s;
}

SensorLog read_sensor_log(std::istream& is, const std::string& source) {
  SensorLog log;
  for (const auto& [ln, text] : content_lines(is)) {
    const auto toks = split_ws(text);
    double t = 0.0;
    long reading = 0;
    if (toks.size() != 2 || !parse_double(toks[0], t) || !parse_int(toks[1], reading)) {
      throw Error(ErrorCode::MalformedGrid, where(source, ln) + ": expected 'time reading'");
    }
    if (reading < 0 || reading > kSensorLevels) {
      throw Error(ErrorCode::ReadingOutOfRange,
                  where(source, ln) + ": reading " + std::to_string(reading) + " outside 0-255");
    }
    if (!log.time.empty() && !(t > log.time.back())) {
      throw Error(ErrorCode::MalformedGrid, where(source, ln) + ": time must increase");
    }
    log.time.push_back(t);
    log.reading.push_back(static_cast<int>(reading));
  }
  return log;
}

SensorLog read_sensor_log(const fs::path& path) {
  std::ifstream in = open_in(path);
  return read_sensor_log(in, path.string());
}

StressEstimate sensor_to_stress(const SensorLog& log) {
  if (log.reading.empty()) throw Error(ErrorCode::EmptyLog, "sensor log has no readings");
  double sum = 0.0;
  for (int r : log.reading) {
    if (r < 0 || r > kSensorLevels) {
      throw Error(ErrorCode::ReadingOutOfRange, "reading " + std::to_string(r) + " outside 0-255");
    }
    sum += r;
  }
  const double n = static_cast<double>(log.reading.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (int r : log.reading) ss += (r - mean) * (r - mean);
  const double sd = log.reading.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const double factor = kSensorFullScaleN / (kSensorLevels * kSensorAreaM2);
  return {mean * factor, sd * factor, log.reading.size()};
}

CreepSeries read_creep_series(std::istream& is, const std::string& source) {
  CreepSeries s;
  for (const auto& [ln, text] : content_lines(is)) {
    const auto toks = split_ws(text);
    double t = 0.0, ax = 0.0, lat = 0.0;
    if (toks.size() != 3 || !parse_double(toks[0], t) || !parse_double(toks[1], ax) ||
        !parse_double(toks[2], lat)) {
      throw Error(ErrorCode::MalformedGrid, where(source, ln) + ": expected 'time axial lateral'");
    }
    s.time.push_back(t);
    s.axial.push_back(ax);
    s.lateral.push_back(lat);
  }
  s.validate();
  return s;
}

CreepSeries read_creep_series(const fs::path& path) {
  std::ifstream in = open_in(path);
  return read_creep_series(in, path.string());
}

namespace {

void require_same_header(const StrainField& ref, const std::string& ref_name,
                         const StrainField& g, const std::string& name) {
  if (ref.rows != g.rows || ref.cols != g.cols || ref.dx != g.dx || ref.dy != g.dy) {
    throw Error(ErrorCode::HeaderMismatch,
                name + " is " + std::to_string(g.rows) + "x" + std::to_string(g.cols) +
                    " (dx " + format_double(g.dx) + ", dy " + format_double(g.dy) + ") but " +
                    ref_name + " is " + std::to_string(ref.rows) + "x" +
                    std::to_string(ref.cols) + " (dx " + format_double(ref.dx) + ", dy " +
                    format_double(ref.dy) + ")");
  }
}

}  // namespace

Dataset parse_dataset(const DatasetPaths& paths, const RunConfig& config) {
  config.validate();
  if (!paths.mask) throw Error(ErrorCode::MissingMask, "no inclusion mask given");
  if (!fs::exists(*paths.mask)) {
    throw Error(ErrorCode::MissingMask, "mask file " + paths.mask->string() + " does not exist");
  }
  Dataset d;
  d.config = config;
  d.axial = read_grid(paths.axial);
  d.lateral = read_grid(paths.lateral);
  require_same_header(d.axial, paths.axial.string(), d.lateral, paths.lateral.string());
  if (paths.elevational) {
    d.elevational = read_grid(*paths.elevational);
    require_same_header(d.axial, paths.axial.string(), *d.elevational,
                        paths.elevational->string());
  }
  d.mask = read_mask(*paths.mask);
  StrainField mask_header(d.mask.rows, d.mask.cols, d.mask.dx, d.mask.dy);
  require_same_header(d.axial, paths.axial.string(), mask_header, paths.mask->string());
  if (config.solver.use_elevational && !d.elevational) {
    throw Error(ErrorCode::InvalidConfig, "use_elevational=true needs --elevational");
  }
  if (!config.background_window.fits(d.axial.rows, d.axial.cols)) {
    throw Error(ErrorCode::WindowOutOfBounds, "background_window does not fit the grid");
  }
  if (config.median_filter_size > 1) {
    d.axial = median_filter(d.axial, config.median_filter_size, &d.mask);
    d.lateral = median_filter(d.lateral, config.median_filter_size, &d.mask);
    if (d.elevational) {
      d.elevational = median_filter(*d.elevational, config.median_filter_size, &d.mask);
    }
  }
  return d;
}

}  // namespace eshelby::io

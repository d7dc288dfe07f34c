#include "quadamp/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ctime>
#include <fstream>
#include <limits>

#include <Eigen/Core>
#include <json.hpp>

#include "quadamp/coupled_modes.hpp"
#include "quadamp/noise.hpp"
#include "quadamp/quadrature.hpp"
#include "quadamp/stability.hpp"
#include "quadamp/tuning.hpp"
#include "quadamp/version.hpp"

namespace quadamp {

namespace {

using json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::array<const char*, 6> kPortNames{"aS", "bS", "cS", "aI", "bI", "cI"};

double to_mhz(double rad) { return rad / (2.0 * kPi * 1e6); }

Cell opt(const std::optional<double>& v) { return v ? Cell{*v} : Cell{std::string("none")}; }

std::string state_name(CellState s) {
  switch (s) {
    case CellState::stable: return "stable";
    case CellState::unstable: return "unstable";
    case CellState::unknown: return "unknown";
  }
  return "unknown";
}

Table sweep_table(const DeviceConfig& cfg) {
  const ModeSet modes = cfg.mode_set();
  std::vector<double> grid;
  for (double mhz : cfg.sweep.delta_mhz.values()) grid.push_back(mhz_to_rad(mhz));
  const SweepResult res = sweep_scattering(modes, cfg.pump_set(), grid);

  Table t;
  t.meta = {{"forward_path", std::string(kPortNames[res.forward_out]) + "<-" + kPortNames[res.forward_in]},
            {"bandwidth_3db_mhz", opt(res.bandwidth_3db ? std::optional(to_mhz(*res.bandwidth_3db)) : std::nullopt)},
            {"return_loss_10db_band_mhz",
             opt(res.return_loss_band ? std::optional(to_mhz(*res.return_loss_band)) : std::nullopt)}};
  t.columns = {"delta_mhz", "singular"};
  for (int o = 0; o < 6; ++o)
    for (int i = 0; i < 6; ++i) {
      const std::string name = std::string("S_") + kPortNames[o] + "_" + kPortNames[i];
      t.columns.push_back(name + "_db");
      t.columns.push_back(name + "_phase_rad");
    }
  for (const SweepRow& row : res.rows) {
    std::vector<Cell> r{to_mhz(row.delta), row.s ? 0.0 : 1.0};
    for (int o = 0; o < 6; ++o)
      for (int i = 0; i < 6; ++i) {
        r.emplace_back(row.s ? power_db((*row.s)(o, i)) : kNaN);
        r.emplace_back(row.s ? std::arg((*row.s)(o, i)) : kNaN);
      }
    t.rows.push_back(std::move(r));
  }
  return t;
}

Table quadrature_table(const DeviceConfig& cfg) {
  const ModeSet modes = cfg.mode_set();
  const PumpSet pumps = cfg.pump_set();
  const GainSummary gains = gain_summary(modes, pumps);
  const SqueezingMetrics sq = squeezing_metrics(gains);
  const NoiseReport noise = noise_report(modes, pumps, cfg.chain_noise);
  const auto theta = cfg.sweep.lo_phase_rad.values();
  const LoPhaseResponse lo = lo_phase_response(
      gains, theta, NoiseFloorInput{noise.covariance, noise.output, cfg.chain_noise.photons});

  Table t;
  t.meta = {{"s", gains.s},
            {"r", gains.r},
            {"gx_db", gains.gx_db()},
            {"gy_db", gains.gy_db()},
            {"signed_sqrt_gxgy", sq.signed_sqrt_product},
            {"squeezing_deviation", sq.ideal_squeezing_deviation},
            {"n_add_fpja", noise.n_add_fpja},
            {"eta_meas", noise.eta_meas}};
  t.columns = {"theta_rad", "power_gain", "power_gain_db", "noise_floor", "noise_floor_with_chain"};
  for (std::size_t k = 0; k < theta.size(); ++k)
    t.rows.push_back({lo.theta[k], lo.power_gain[k], power_db(lo.power_gain[k]), lo.noise_floor[k],
                      lo.noise_floor_with_chain[k]});
  return t;
}

Table noise_table(const DeviceConfig& cfg) {
  const ModeSet modes = cfg.mode_set();
  const PumpSet pumps = cfg.pump_set();
  const NoiseReport point = noise_report(modes, pumps, cfg.chain_noise);
  const PerformanceBounds bounds = performance_bounds(modes);

  Table t;
  t.meta = {{"gx_db", power_db(point.gain_x)},
            {"n_add_fpja", point.n_add_fpja},
            {"n_add_total", point.n_add_total},
            {"eta_meas", point.eta_meas},
            {"eta_lo", point.eta_interval.lo},
            {"eta_hi", point.eta_interval.hi},
            {"eta_bound", bounds.max_eta}};
  t.columns = {"target_gx_db", "r", "beta_bb", "status", "gx_db", "n_add_fpja", "n_add_total",
               "eta_meas", "eta_lo", "eta_hi"};

  const double ab = std::abs(pumps.beta_ab);
  const double s = conversion_ratio(ab);
  const double eac = std::sqrt(modes[0].eta() * modes[2].eta());
  for (double gdb : cfg.sweep.gain_db.values()) {
    const double r = 1.0 - 2.0 * s / (std::pow(10.0, gdb / 20.0) / eac + 1.0);
    std::vector<Cell> row{gdb, r, kNaN, std::string("ok"), kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
    if (!(r >= 0.0 && r < 1.0)) {
      row[3] = std::string("unreachable");
      t.rows.push_back(std::move(row));
      continue;
    }
    PumpSet p = pumps;
    p.beta_bb = std::polar(0.5 * r * (1.0 + 4.0 * ab * ab), -kPi / 2);
    row[2] = std::abs(p.beta_bb);
    try {
      const NoiseReport rep = noise_report(modes, p, cfg.chain_noise);
      row[4] = power_db(rep.gain_x);
      row[5] = rep.n_add_fpja;
      row[6] = rep.n_add_total;
      row[7] = rep.eta_meas;
      row[8] = rep.eta_interval.lo;
      row[9] = rep.eta_interval.hi;
    } catch (const Error& e) {
      row[3] = std::string(to_string(e.kind()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table stability_table(const DeviceConfig& cfg) {
  const ModeSet modes = cfg.mode_set();
  const PumpSet pumps = cfg.pump_set();
  const auto gains = cfg.sweep.gain_db.values();
  const auto phases = cfg.sweep.loop_phase_rad.values();
  const StabilityRegion reg = stability_region(modes, pumps, gains, phases);
  const StabilityReport point = characteristic_roots(modes, pumps);

  Table t;
  t.meta = {{"config_stable", std::string(point.stable ? "true" : "false")},
            {"config_margin_rad_s", point.margin},
            {"min_unstable_gain_db", opt(reg.min_unstable_gain_db)}};
  try {
    const StabilityReport rc = routh_coefficients(modes, pumps);
    t.meta.emplace_back("routh_stable", std::string(rc.stable ? "true" : "false"));
    t.meta.emplace_back("b_phi", rc.b_phi);
  } catch (const Error&) {
    t.meta.emplace_back("routh_stable", std::string("out_of_regime"));
  }
  t.columns = {"gain_db", "loop_phase_rad", "r", "state", "margin_rad_s"};
  for (std::size_t g = 0; g < gains.size(); ++g)
    for (std::size_t p = 0; p < phases.size(); ++p)
      t.rows.push_back({gains[g], phases[p], reg.r[g], state_name(reg.cells[g][p]), reg.margin[g][p]});
  return t;
}

Table tune_table(const DeviceConfig& cfg) {
  if (!cfg.targets) throw Error(ErrorKind::ValidationError, "tune needs a targets block");
  const TuningResult res = program_device(cfg.mode_set(), *cfg.targets);

  Table t;
  t.meta = {{"target_gx_db", cfg.targets->gx_db},
            {"target_s", cfg.targets->s},
            {"loop_sign", static_cast<double>(cfg.targets->loop_sign)},
            {"stable", std::string(res.stable ? "true" : "false")}};
  t.columns = {"stage", "beta_ab", "beta_bc", "beta_ac", "beta_bb", "loop_phase_rad", "forward_db",
               "reverse_db", "isolation_db", "reflection_a_db", "reflection_c_db", "gx_db"};
  for (const StageReport& st : res.stages) {
    t.rows.push_back({st.stage, std::abs(st.pumps.beta_ab), std::abs(st.pumps.beta_bc),
                      std::abs(st.pumps.beta_ac), std::abs(st.pumps.beta_bb), st.pumps.loop_phase(),
                      st.forward_db, st.reverse_db, st.isolation_db, st.reflection_a_db,
                      st.reflection_c_db, st.gx_db.value_or(kNaN)});
  }
  return t;
}

Table bounds_table(const DeviceConfig& cfg) {
  const PerformanceBounds b = performance_bounds(cfg.mode_set());
  Table t;
  t.columns = {"min_sqrt_gy", "min_gy_db", "min_n_add", "max_eta"};
  t.rows.push_back({b.min_sqrt_gy, power_db(b.min_sqrt_gy * b.min_sqrt_gy), b.min_n_add, b.max_eta});
  return t;
}

std::string cell_text(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_number(*d);
  return std::get<std::string>(c);
}

json cell_json(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) {
    if (std::isnan(*d)) return nullptr;
    if (std::isinf(*d)) return format_number(*d);
    return std::stod(format_number(*d));
  }
  return std::get<std::string>(c);
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ValidationError, path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw Error(ErrorKind::ValidationError, path.string() + ": write failed");
}

struct ManifestInfo {
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string format;
  std::optional<DeviceConfig> config;
};

void write_manifest(const std::filesystem::path& out, const ManifestInfo& info, const RunOutcome& oc,
                    const std::string& started, double seconds) {
  json m;
  m["tool"] = "quadamp";
  m["version"] = kVersion;
  m["command"] = info.command;
  m["config_path"] = info.config_path;
  m["overrides"] = info.overrides;
  m["format"] = info.format;
  m["output"] = out.string();
  m["status"] = oc.exit_code == 0 ? "ok" : "error";
  m["exit_code"] = oc.exit_code;
  m["error_kind"] = oc.error ? json(std::string(to_string(*oc.error))) : json(nullptr);
  m["message"] = oc.message;
  m["started_utc"] = started;
  m["wall_seconds"] = seconds;
  m["compiler"] = __VERSION__;
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  m["config"] = info.config ? json::parse(config_to_json(*info.config)) : json(nullptr);
  write_text(manifest_path(out), m.dump(2) + "\n");
}

RunOutcome execute(Command command, const std::function<DeviceConfig()>& load,
                   const std::filesystem::path& out, OutputFormat format, ManifestInfo info) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  RunOutcome oc;
  oc.manifest = manifest_path(out);
  try {
    info.config = load();
    const Table t = build_table(command, *info.config);
    write_text(out, format == OutputFormat::json ? render_json(t, command, *info.config)
                                                 : render_csv(t, command, *info.config));
  } catch (const Error& e) {
    oc.error = e.kind();
    oc.exit_code = exit_code_for(e.kind());
    oc.message = std::string(to_string(command)) + ": " + e.what();
  } catch (const std::exception& e) {
    oc.exit_code = 4;
    oc.message = std::string(to_string(command)) + ": " + e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_manifest(out, info, oc, started, seconds);
  } catch (const std::exception& e) {
    if (oc.exit_code == 0) {
      oc.error = ErrorKind::ValidationError;
      oc.exit_code = 2;
      oc.message = e.what();
    }
  }
  return oc;
}

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  for (Command c : {Command::sweep, Command::quadrature, Command::noise, Command::stability,
                    Command::tune, Command::bounds})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::sweep: return "sweep";
    case Command::quadrature: return "quadrature";
    case Command::noise: return "noise";
    case Command::stability: return "stability";
    case Command::tune: return "tune";
    case Command::bounds: return "bounds";
  }
  return "unknown";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

Table build_table(Command command, const DeviceConfig& config) {
  switch (command) {
    case Command::sweep: return sweep_table(config);
    case Command::quadrature: return quadrature_table(config);
    case Command::noise: return noise_table(config);
    case Command::stability: return stability_table(config);
    case Command::tune: return tune_table(config);
    case Command::bounds: return bounds_table(config);
  }
  throw Error(ErrorKind::ValidationError, "unknown command");
}

std::string render_csv(const Table& t, Command command, const DeviceConfig& config) {
  std::string out;
  out += "# quadamp " + std::string(kVersion) + "\n";
  out += "# command: " + std::string(to_string(command)) + "\n";
  out += "# config: " + config_to_json(config, -1) + "\n";
  for (const auto& [k, v] : t.meta) out += "# " + k + ": " + cell_text(v) + "\n";
  for (std::size_t k = 0; k < t.columns.size(); ++k) out += (k ? "," : "") + t.columns[k];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + cell_text(row[k]);
    out += "\n";
  }
  return out;
}

std::string render_json(const Table& t, Command command, const DeviceConfig& config) {
  json doc;
  doc["tool"] = "quadamp";
  doc["version"] = kVersion;
  doc["command"] = std::string(to_string(command));
  doc["config"] = json::parse(config_to_json(config));
  json meta = json::object();
  for (const auto& [k, v] : t.meta) meta[k] = cell_json(v);
  doc["meta"] = meta;
  doc["columns"] = t.columns;
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (const auto& c : row) r.push_back(cell_json(c));
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(1) + "\n";
}

std::filesystem::path manifest_path(const std::filesystem::path& out) {
  return std::filesystem::path(out.string() + ".manifest.json");
}

RunOutcome run_command(const RunRequest& req) {
  ManifestInfo info{std::string(to_string(req.command)), req.config_path.string(), req.overrides,
                    req.format == OutputFormat::json ? "json" : "csv", std::nullopt};
  return execute(
      req.command, [&] { return load_config(req.config_path, req.overrides); }, req.out, req.format,
      std::move(info));
}

RunOutcome run_command(Command command, const DeviceConfig& config, const std::filesystem::path& out,
                       OutputFormat format) {
  ManifestInfo info{std::string(to_string(command)), "", {}, format == OutputFormat::json ? "json" : "csv",
                    std::nullopt};
  return execute(command, [&] { return config; }, out, format, std::move(info));
}

}  // namespace quadamp

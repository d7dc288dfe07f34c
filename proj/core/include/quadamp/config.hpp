#pragma once

// Device configuration file (JSON). Frequencies are given in GHz and rates
// in MHz as written; mode_set() converts to rad/s.
//
//   modes.{a,b,c}.{freq_ghz, kappa_mhz, kappa_ext_mhz}
//   pumps.{beta_ab,beta_bc,beta_ac,beta_bb}.{mag, phase_rad}
//   targets.{gx_db, s, loop_sign}
//   chain_noise.{photons, err_minus, err_plus}
//   sweep.{delta_mhz, lo_phase_rad, gain_db, loop_phase_rad}.{start, stop, points}
//   internal_loss.kappa_b_int_mhz
//
// Unknown keys are rejected. kappa_ext_mhz of mode b may be omitted when
// internal_loss.kappa_b_int_mhz is given; it is then kappa - kappa_b_int.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quadamp/coupled_modes.hpp"
#include "quadamp/noise.hpp"
#include "quadamp/tuning.hpp"

namespace quadamp {

struct ModeEntry {
  double freq_ghz = 0.0;
  double kappa_mhz = 0.0;
  std::optional<double> kappa_ext_mhz;

  bool operator==(const ModeEntry&) const = default;
};

struct PumpEntry {
  double mag = 0.0;
  double phase_rad = 0.0;

  bool operator==(const PumpEntry&) const = default;
};

struct PumpEntries {
  PumpEntry beta_ab, beta_bc, beta_ac, beta_bb;

  bool operator==(const PumpEntries&) const = default;
};

struct GridSpec {
  double start = 0.0;
  double stop = 1.0;
  int points = 2;

  std::vector<double> values() const;
  bool operator==(const GridSpec&) const = default;
};

struct SweepGrids {
  GridSpec delta_mhz{-20.0, 20.0, 401};
  GridSpec lo_phase_rad{0.0, kPi, 181};
  GridSpec gain_db{0.0, 30.0, 61};
  GridSpec loop_phase_rad{-kPi, kPi, 73};

  bool operator==(const SweepGrids&) const = default;
};

struct DeviceConfig {
  std::array<ModeEntry, 3> modes{};
  std::optional<PumpEntries> pumps;
  std::optional<TuningTargets> targets;
  ChainNoise chain_noise;
  SweepGrids sweep;
  std::optional<double> kappa_b_int_mhz;

  ModeSet mode_set() const;
  PumpSet pump_set() const;  // throws ValidationError without a pumps block

  bool operator==(const DeviceConfig&) const = default;
};

double mhz_to_rad(double mhz);

/// Parses text; `origin` names the source in messages. Overrides are
/// "dotted.key=value" with a JSON or bare-string value, applied before
/// validation.
DeviceConfig parse_config(const std::string& text, const std::string& origin = "<config>",
                          const std::vector<std::string>& overrides = {});

DeviceConfig load_config(const std::filesystem::path& path,
                         const std::vector<std::string>& overrides = {});

std::string config_to_json(const DeviceConfig& c, int indent = 2);
void write_config(const DeviceConfig& c, const std::filesystem::path& path);

/// Throws ValidationError listing every violation.
void validate(const DeviceConfig& c);

}  // namespace quadamp

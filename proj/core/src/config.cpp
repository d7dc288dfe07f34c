#include "quadamp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "quadamp/error.hpp"

namespace quadamp {

namespace {

using json = nlohmann::ordered_json;

constexpr std::array<const char*, 3> kModeKeys{"a", "b", "c"};
constexpr std::array<const char*, 4> kPumpKeys{"beta_ab", "beta_bc", "beta_ac", "beta_bb"};
constexpr std::array<const char*, 4> kGridKeys{"delta_mhz", "lo_phase_rad", "gain_db",
                                               "loop_phase_rad"};

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

/// Walks the document against the schema and remembers where keys live.
class Reader {
 public:
  Reader(const std::string& text, const std::string& origin) : text_(text), origin_(origin) {}

  std::string where(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    for (const auto& key : path) {
      pos = text_.find('"' + key + '"', pos);
      if (pos == std::string::npos) return origin_ + " (override) key '" + join(path) + "'";
    }
    return origin_ + ":" + std::to_string(line_of_offset(text_, pos)) + ": key '" + join(path) + "'";
  }

  static std::string join(const std::vector<std::string>& path) {
    std::string out;
    for (const auto& p : path) out += (out.empty() ? "" : ".") + p;
    return out;
  }

  void allow_only(const json& node, const std::vector<std::string>& path,
                  std::initializer_list<const char*> keys) {
    if (!node.is_object()) {
      parse_errors_.push_back(where(path) + " must be an object");
      return;
    }
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : node.items()) {
      if (!allowed.count(k)) {
        auto p = path;
        p.push_back(k);
        parse_errors_.push_back(where(p) + " is not a recognised setting");
      }
    }
  }

  std::optional<double> number(const json& node, std::vector<std::string> path, const char* key) {
    path.push_back(key);
    if (!node.is_object() || !node.contains(key)) return std::nullopt;
    const json& v = node.at(key);
    if (!v.is_number()) {
      parse_errors_.push_back(where(path) + " must be a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<int> integer(const json& node, std::vector<std::string> path, const char* key) {
    const auto v = number(node, path, key);
    if (!v) return std::nullopt;
    path.push_back(key);
    if (std::floor(*v) != *v || std::abs(*v) > 1e9) {
      parse_errors_.push_back(where(path) + " must be an integer");
      return std::nullopt;
    }
    return static_cast<int>(*v);
  }

  double required(const json& node, const std::vector<std::string>& path, const char* key,
                  double fallback = 0.0) {
    if (node.is_object() && node.contains(key)) return number(node, path, key).value_or(fallback);
    missing_.push_back(join(path) + "." + key + " is missing");
    return fallback;
  }

  std::vector<std::string> parse_errors_;
  std::vector<std::string> missing_;

 private:
  const std::string& text_;
  const std::string& origin_;
};

void apply_override(json& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorKind::ParseError, "override '" + spec + "' must look like key=value");
  const std::string key = spec.substr(0, eq), raw = spec.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }

  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw Error(ErrorKind::ParseError, "override key '" + key + "' has an empty part");
    if (!node->is_object())
      throw Error(ErrorKind::ParseError, "override '" + key + "' descends into a non-object value");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

json grid_json(const GridSpec& g) { return json{{"start", g.start}, {"stop", g.stop}, {"points", g.points}}; }

std::vector<std::string> problems(const DeviceConfig& c) {
  std::vector<std::string> bad;
  auto positive = [&](double v, const std::string& what) {
    if (!(v > 0.0) || !std::isfinite(v)) bad.push_back(what + " must be > 0 (got " + num(v) + ")");
  };

  for (int j = 0; j < 3; ++j) {
    const std::string p = std::string("modes.") + kModeKeys[j];
    const ModeEntry& m = c.modes[j];
    positive(m.freq_ghz, p + ".freq_ghz");
    positive(m.kappa_mhz, p + ".kappa_mhz");
    if (m.kappa_ext_mhz) {
      const double e = *m.kappa_ext_mhz;
      if (!(e >= 0.0) || !std::isfinite(e)) bad.push_back(p + ".kappa_ext_mhz must be >= 0");
      else if (e > m.kappa_mhz) bad.push_back(p + ".kappa_ext_mhz exceeds kappa_mhz");
    }
  }
  if (c.kappa_b_int_mhz) {
    const double ki = *c.kappa_b_int_mhz;
    const ModeEntry& b = c.modes[1];
    if (!(ki >= 0.0) || !std::isfinite(ki)) bad.push_back("internal_loss.kappa_b_int_mhz must be >= 0");
    else if (ki > b.kappa_mhz) bad.push_back("internal_loss.kappa_b_int_mhz exceeds modes.b.kappa_mhz");
    else if (b.kappa_ext_mhz &&
             std::abs(b.kappa_mhz - *b.kappa_ext_mhz - ki) > 1e-9 * std::max(1.0, b.kappa_mhz))
      bad.push_back("internal_loss.kappa_b_int_mhz disagrees with modes.b kappa_mhz - kappa_ext_mhz");
  }

  if (c.pumps) {
    const std::array<const PumpEntry*, 4> ps{&c.pumps->beta_ab, &c.pumps->beta_bc, &c.pumps->beta_ac,
                                             &c.pumps->beta_bb};
    for (int k = 0; k < 4; ++k) {
      const std::string p = std::string("pumps.") + kPumpKeys[k];
      if (!(ps[k]->mag >= 0.0) || !std::isfinite(ps[k]->mag)) bad.push_back(p + ".mag must be >= 0");
      if (!std::isfinite(ps[k]->phase_rad)) bad.push_back(p + ".phase_rad must be finite");
    }
  }
  if (c.targets) {
    if (!std::isfinite(c.targets->gx_db)) bad.push_back("targets.gx_db must be finite");
    if (!(c.targets->s > 0.0 && c.targets->s < 1.0)) bad.push_back("targets.s must lie in (0, 1)");
    if (c.targets->loop_sign != 1 && c.targets->loop_sign != -1)
      bad.push_back("targets.loop_sign must be +1 or -1");
  }
  if (!c.pumps && !c.targets) bad.push_back("config needs a pumps or a targets block");

  const ChainNoise& ch = c.chain_noise;
  if (!(ch.photons >= 0.0)) bad.push_back("chain_noise.photons must be >= 0");
  if (!(ch.err_minus >= 0.0)) bad.push_back("chain_noise.err_minus must be >= 0");
  if (!(ch.err_plus >= 0.0)) bad.push_back("chain_noise.err_plus must be >= 0");

  const std::array<const GridSpec*, 4> gs{&c.sweep.delta_mhz, &c.sweep.lo_phase_rad, &c.sweep.gain_db,
                                          &c.sweep.loop_phase_rad};
  for (int k = 0; k < 4; ++k) {
    const std::string p = std::string("sweep.") + kGridKeys[k];
    if (gs[k]->points < 2) bad.push_back(p + ".points must be >= 2");
    if (!std::isfinite(gs[k]->start) || !std::isfinite(gs[k]->stop) || !(gs[k]->stop > gs[k]->start))
      bad.push_back(p + " needs finite start < stop");
  }
  return bad;
}

[[noreturn]] void fail_validation(const std::string& origin, const std::vector<std::string>& bad) {
  std::string msg = origin + ": " + std::to_string(bad.size()) + " invalid setting(s)";
  for (const auto& b : bad) msg += "\n  " + b;
  throw Error(ErrorKind::ValidationError, msg);
}

}  // namespace

double mhz_to_rad(double mhz) { return 2.0 * kPi * mhz * 1e6; }

std::vector<double> GridSpec::values() const {
  std::vector<double> v(static_cast<std::size_t>(std::max(points, 0)));
  for (int k = 0; k < points; ++k)
    v[k] = points == 1 ? start : start + (stop - start) * k / (points - 1);
  if (points >= 2) v.back() = stop;
  return v;
}

ModeSet DeviceConfig::mode_set() const {
  ModeSet out;
  for (int j = 0; j < 3; ++j) {
    const ModeEntry& m = modes[j];
    double ext = m.kappa_ext_mhz.value_or(m.kappa_mhz);
    if (j == 1 && !m.kappa_ext_mhz && kappa_b_int_mhz) ext = m.kappa_mhz - *kappa_b_int_mhz;
    out[j] = ModeParams{static_cast<Mode>(j), 2.0 * kPi * m.freq_ghz * 1e9, mhz_to_rad(m.kappa_mhz),
                        mhz_to_rad(ext)};
  }
  return out;
}

PumpSet DeviceConfig::pump_set() const {
  if (!pumps) throw Error(ErrorKind::ValidationError, "this command needs a pumps block");
  auto c = [](const PumpEntry& e) { return std::polar(e.mag, e.phase_rad); };
  return PumpSet{c(pumps->beta_ab), c(pumps->beta_bc), c(pumps->beta_ac), c(pumps->beta_bb)};
}

void validate(const DeviceConfig& c) {
  const auto bad = problems(c);
  if (!bad.empty()) fail_validation("config", bad);
}

DeviceConfig parse_config(const std::string& text, const std::string& origin,
                          const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const int line = line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorKind::ParseError, origin + ":" + std::to_string(line) + ": " + e.what());
  }
  for (const auto& o : overrides) apply_override(root, o);

  Reader rd(text, origin);
  DeviceConfig c;
  rd.allow_only(root, {}, {"modes", "pumps", "targets", "chain_noise", "sweep", "internal_loss"});
  if (!rd.parse_errors_.empty() && !root.is_object()) {
    throw Error(ErrorKind::ParseError, origin + ": top level must be an object");
  }

  if (!root.contains("modes")) {
    rd.missing_.push_back("modes is missing");
  } else {
    const json& modes = root["modes"];
    rd.allow_only(modes, {"modes"}, {"a", "b", "c"});
    for (int j = 0; j < 3; ++j) {
      const std::vector<std::string> p{"modes", kModeKeys[j]};
      if (!modes.is_object() || !modes.contains(kModeKeys[j])) {
        rd.missing_.push_back(Reader::join(p) + " is missing");
        continue;
      }
      const json& m = modes[kModeKeys[j]];
      rd.allow_only(m, p, {"freq_ghz", "kappa_mhz", "kappa_ext_mhz"});
      c.modes[j].freq_ghz = rd.required(m, p, "freq_ghz");
      c.modes[j].kappa_mhz = rd.required(m, p, "kappa_mhz");
      c.modes[j].kappa_ext_mhz = rd.number(m, p, "kappa_ext_mhz");
    }
  }

  if (root.contains("internal_loss")) {
    rd.allow_only(root["internal_loss"], {"internal_loss"}, {"kappa_b_int_mhz"});
    c.kappa_b_int_mhz = rd.number(root["internal_loss"], {"internal_loss"}, "kappa_b_int_mhz");
  }
  for (int j = 0; j < 3; ++j) {
    const bool derived = j == 1 && c.kappa_b_int_mhz;
    if (root.contains("modes") && root["modes"].contains(kModeKeys[j]) && !c.modes[j].kappa_ext_mhz &&
        !derived)
      rd.missing_.push_back(std::string("modes.") + kModeKeys[j] + ".kappa_ext_mhz is missing");
  }

  if (root.contains("pumps")) {
    const json& pumps = root["pumps"];
    rd.allow_only(pumps, {"pumps"}, {"beta_ab", "beta_bc", "beta_ac", "beta_bb"});
    PumpEntries pe;
    std::array<PumpEntry*, 4> dst{&pe.beta_ab, &pe.beta_bc, &pe.beta_ac, &pe.beta_bb};
    for (int k = 0; k < 4; ++k) {
      const std::vector<std::string> p{"pumps", kPumpKeys[k]};
      if (!pumps.is_object() || !pumps.contains(kPumpKeys[k])) {
        rd.missing_.push_back(Reader::join(p) + " is missing");
        continue;
      }
      const json& e = pumps[kPumpKeys[k]];
      rd.allow_only(e, p, {"mag", "phase_rad"});
      dst[k]->mag = rd.required(e, p, "mag");
      dst[k]->phase_rad = rd.number(e, p, "phase_rad").value_or(0.0);
    }
    c.pumps = pe;
  }

  if (root.contains("targets")) {
    const json& t = root["targets"];
    const std::vector<std::string> p{"targets"};
    rd.allow_only(t, p, {"gx_db", "s", "loop_sign"});
    TuningTargets tt;
    tt.gx_db = rd.required(t, p, "gx_db");
    tt.s = rd.required(t, p, "s", tt.s);
    if (t.is_object() && t.contains("loop_sign")) tt.loop_sign = rd.integer(t, p, "loop_sign").value_or(1);
    c.targets = tt;
  }

  if (root.contains("chain_noise")) {
    const json& ch = root["chain_noise"];
    const std::vector<std::string> p{"chain_noise"};
    rd.allow_only(ch, p, {"photons", "err_minus", "err_plus"});
    c.chain_noise.photons = rd.number(ch, p, "photons").value_or(c.chain_noise.photons);
    c.chain_noise.err_minus = rd.number(ch, p, "err_minus").value_or(c.chain_noise.err_minus);
    c.chain_noise.err_plus = rd.number(ch, p, "err_plus").value_or(c.chain_noise.err_plus);
  }

  if (root.contains("sweep")) {
    const json& sw = root["sweep"];
    rd.allow_only(sw, {"sweep"}, {"delta_mhz", "lo_phase_rad", "gain_db", "loop_phase_rad"});
    std::array<GridSpec*, 4> dst{&c.sweep.delta_mhz, &c.sweep.lo_phase_rad, &c.sweep.gain_db,
                                 &c.sweep.loop_phase_rad};
    for (int k = 0; k < 4; ++k) {
      if (!sw.is_object() || !sw.contains(kGridKeys[k])) continue;
      const std::vector<std::string> p{"sweep", kGridKeys[k]};
      const json& g = sw[kGridKeys[k]];
      rd.allow_only(g, p, {"start", "stop", "points"});
      // a partial grid keeps the defaults for the keys it leaves out
      dst[k]->start = rd.number(g, p, "start").value_or(dst[k]->start);
      dst[k]->stop = rd.number(g, p, "stop").value_or(dst[k]->stop);
      dst[k]->points = rd.integer(g, p, "points").value_or(dst[k]->points);
    }
  }

  if (!rd.parse_errors_.empty()) {
    std::string msg = rd.parse_errors_.front();
    for (std::size_t k = 1; k < rd.parse_errors_.size(); ++k) msg += "\n" + rd.parse_errors_[k];
    throw Error(ErrorKind::ParseError, msg);
  }

  auto bad = rd.missing_;
  for (auto& b : problems(c)) bad.push_back(std::move(b));
  if (!bad.empty()) fail_validation(origin, bad);
  return c;
}

DeviceConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string(), overrides);
}

std::string config_to_json(const DeviceConfig& c, int indent) {
  json root;
  json modes = json::object();
  for (int j = 0; j < 3; ++j) {
    json m{{"freq_ghz", c.modes[j].freq_ghz}, {"kappa_mhz", c.modes[j].kappa_mhz}};
    if (c.modes[j].kappa_ext_mhz) m["kappa_ext_mhz"] = *c.modes[j].kappa_ext_mhz;
    modes[kModeKeys[j]] = m;
  }
  root["modes"] = modes;
  if (c.pumps) {
    const std::array<const PumpEntry*, 4> ps{&c.pumps->beta_ab, &c.pumps->beta_bc, &c.pumps->beta_ac,
                                             &c.pumps->beta_bb};
    json pumps = json::object();
    for (int k = 0; k < 4; ++k) pumps[kPumpKeys[k]] = json{{"mag", ps[k]->mag}, {"phase_rad", ps[k]->phase_rad}};
    root["pumps"] = pumps;
  }
  if (c.targets)
    root["targets"] = json{{"gx_db", c.targets->gx_db}, {"s", c.targets->s}, {"loop_sign", c.targets->loop_sign}};
  root["chain_noise"] = json{{"photons", c.chain_noise.photons},
                             {"err_minus", c.chain_noise.err_minus},
                             {"err_plus", c.chain_noise.err_plus}};
  root["sweep"] = json{{"delta_mhz", grid_json(c.sweep.delta_mhz)},
                       {"lo_phase_rad", grid_json(c.sweep.lo_phase_rad)},
                       {"gain_db", grid_json(c.sweep.gain_db)},
                       {"loop_phase_rad", grid_json(c.sweep.loop_phase_rad)}};
  if (c.kappa_b_int_mhz) root["internal_loss"] = json{{"kappa_b_int_mhz", *c.kappa_b_int_mhz}};
  return root.dump(indent);
}

void write_config(const DeviceConfig& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ParseError, path.string() + ": cannot write config file");
  out << config_to_json(c) << '\n';
}

}  // namespace quadamp

#pragma once

// Run configuration: a line-oriented `key = value [unit]` document.
//
//   # DOS curves at 5 T
//   B       = 5 T
//   E_perp  = 2000, 4000, 8000, 12000 V/m
//   sweep_start = 0 hwL
//
// Values are converted to SI on parse. `config_echo` writes the canonical
// form (SI units, shortest round-trip number formatting), which parses back
// to an identical RunConfig.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "qhall/constants.hpp"
#include "qhall/dos.hpp"
#include "qhall/errors.hpp"
#include "qhall/transport.hpp"

namespace qhall::config {

enum class SweepVariable { energy, B, E_perp };
enum class Spacing { linear, log };
enum class Command { dos_sweep, hall_sweep, filling_table, breakdown };

struct SweepSpec {
  SweepVariable variable = SweepVariable::energy;
  double start = 0.0;
  double stop = 16.0;
  bool scaled_energy = true;  ///< start/stop in units of hbar omega_L (energy sweeps only)
  int points = 4000;
  Spacing spacing = Spacing::linear;
  std::set<std::string> outputs{"dos", "idos", "sigma", "rho", "E_y", "plateaus"};

  bool operator==(const SweepSpec&) const = default;
};

inline transport::MaterialParams spinless_material() {
  transport::MaterialParams m;
  m.spin = dos::SpinTreatment::spinless;
  return m;
}

struct RunConfig {
  std::optional<double> B;          ///< T; required for fixed-field runs
  std::vector<double> e_perp{4000.0};  ///< V/m; dos-sweep writes one file per value
  double m_eff = constants::electron_mass;
  double g_factor = 0.0;
  transport::MaterialParams material = spinless_material();
  SweepSpec sweep;
  int k_max = 4;
  int k_cap = 10000;
  double tolerance = 1e-9;
  bool spin = false;
  bool per_level = false;
  bool si = false;
  std::string out = ".";

  /// Field configuration at the first (or only) E_perp.
  [[nodiscard]] dos::FieldConfiguration field(double e_perp_value) const {
    return {B.value_or(0.0), e_perp_value, m_eff, g_factor};
  }
  [[nodiscard]] dos::FieldConfiguration field() const { return field(e_perp.front()); }
  [[nodiscard]] dos::SpinTreatment spin_treatment() const {
    return spin ? dos::SpinTreatment::resolved : dos::SpinTreatment::spinless;
  }

  bool operator==(const RunConfig&) const = default;
};

inline const char* to_string(Command c) {
  switch (c) {
    case Command::dos_sweep: return "dos-sweep";
    case Command::hall_sweep: return "hall-sweep";
    case Command::filling_table: return "filling-table";
    case Command::breakdown: return "breakdown";
  }
  return "?";
}

inline const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::energy: return "energy";
    case SweepVariable::B: return "B";
    case SweepVariable::E_perp: return "E_perp";
  }
  return "?";
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Value {
  std::vector<double> numbers;
  std::string unit;
  std::string text;  ///< trimmed raw value
};

/// "2000, 4000 V/m" -> {2000, 4000}, "V/m". Non-numeric values keep only `text`.
inline Value split_value(std::string_view raw) {
  Value v;
  v.text = std::string(trim(raw));
  std::string_view rest = v.text;
  while (!rest.empty()) {
    rest = trim(rest);
    if (rest.empty()) break;
    double x = 0.0;
    const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), x);
    if (res.ec != std::errc{}) break;
    v.numbers.push_back(x);
    rest.remove_prefix(static_cast<std::size_t>(res.ptr - rest.data()));
    rest = trim(rest);
    if (!rest.empty() && rest.front() == ',') rest.remove_prefix(1);
  }
  v.unit = std::string(trim(rest));
  return v;
}

using UnitTable = std::map<std::string, double, std::less<>>;

inline const UnitTable& units_field() {
  static const UnitTable t{{"", 1.0}, {"T", 1.0}, {"mT", 1e-3}};
  return t;
}
inline const UnitTable& units_efield() {
  static const UnitTable t{{"", 1.0}, {"V/m", 1.0}, {"kV/m", 1e3}, {"V/cm", 1e2}};
  return t;
}
inline const UnitTable& units_energy() {
  static const UnitTable t{{"", 1.0}, {"J", 1.0}, {"eV", constants::eV}, {"meV", constants::meV},
                           {"ueV", 1e-6 * constants::eV}};
  return t;
}
inline const UnitTable& units_mass() {
  static const UnitTable t{{"", 1.0}, {"kg", 1.0}, {"me", constants::electron_mass}};
  return t;
}
inline const UnitTable& units_time() {
  static const UnitTable t{{"", 1.0}, {"s", 1.0}, {"ps", 1e-12}, {"ns", 1e-9}};
  return t;
}
inline const UnitTable& units_temperature() {
  static const UnitTable t{{"", 1.0}, {"K", 1.0}, {"mK", 1e-3}};
  return t;
}
inline const UnitTable& units_current() {
  static const UnitTable t{{"", 1.0}, {"A/m", 1.0}, {"mA/m", 1e-3}};
  return t;
}
inline const UnitTable& units_none() {
  static const UnitTable t{{"", 1.0}};
  return t;
}

struct Entry {
  int line = 0;
  std::string key;
  Value value;
};

inline double scalar(const Entry& e, const UnitTable& units) {
  if (e.value.numbers.size() != 1) {
    throw ParseError(e.line, "key '" + e.key + "' expects one number, got '" + e.value.text + "'");
  }
  const auto it = units.find(e.value.unit);
  if (it == units.end()) {
    throw ParseError(e.line, "unknown unit '" + e.value.unit + "' for key '" + e.key + "'");
  }
  return e.value.numbers.front() * it->second;
}

inline std::vector<double> list(const Entry& e, const UnitTable& units) {
  if (e.value.numbers.empty()) {
    throw ParseError(e.line, "key '" + e.key + "' expects numbers, got '" + e.value.text + "'");
  }
  const auto it = units.find(e.value.unit);
  if (it == units.end()) {
    throw ParseError(e.line, "unknown unit '" + e.value.unit + "' for key '" + e.key + "'");
  }
  std::vector<double> out;
  for (double x : e.value.numbers) out.push_back(x * it->second);
  return out;
}

inline int integer(const Entry& e) {
  const double x = scalar(e, units_none());
  if (x != std::floor(x) || std::abs(x) > 1e9) {
    throw ParseError(e.line, "key '" + e.key + "' expects an integer, got '" + e.value.text + "'");
  }
  return static_cast<int>(x);
}

inline bool flag(const Entry& e) {
  const auto& t = e.value.text;
  if (t == "on" || t == "true" || t == "yes" || t == "1") return true;
  if (t == "off" || t == "false" || t == "no" || t == "0") return false;
  throw ParseError(e.line, "key '" + e.key + "' expects on/off, got '" + t + "'");
}

}  // namespace detail

/// Every recognised key, in canonical echo order.
inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "B",           "E_perp",       "m_eff",         "g",        "E_F",         "tau",
      "T",           "j_x",          "sweep_variable", "sweep_start", "sweep_stop", "sweep_points",
      "sweep_spacing", "outputs",    "k_max",         "k_cap",    "tol",         "spin",
      "per_level",   "si",           "out"};
  return keys;
}

/// Short spellings accepted in config files and on the command line.
inline std::string canonical_key(std::string_view key) {
  static const std::map<std::string, std::string, std::less<>> aliases{
      {"points", "sweep_points"}, {"start", "sweep_start"}, {"stop", "sweep_stop"},
      {"variable", "sweep_variable"}, {"spacing", "sweep_spacing"}, {"tolerance", "tol"}};
  const auto it = aliases.find(key);
  return it == aliases.end() ? std::string(key) : it->second;
}

/// Parses a configuration document, applies defaults and validates the
/// command-independent invariants. Later lines override earlier ones.
/// With `command`, the command-specific requirements are checked as well.
RunConfig parse_config(std::string_view text, std::optional<Command> command = std::nullopt);

/// Throws ValidationError naming the first violated invariant.
void validate(const RunConfig& cfg, std::optional<Command> command = std::nullopt);

inline RunConfig parse_config(std::string_view text, std::optional<Command> command) {
  using namespace detail;
  std::vector<Entry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    pos = (end == std::string_view::npos) ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    Entry e;
    e.line = line_no;
    e.key = canonical_key(trim(line.substr(0, eq)));
    e.value = split_value(line.substr(eq + 1));
    if (e.key.empty()) throw ParseError(line_no, "missing key");
    if (e.value.text.empty()) throw ParseError(line_no, "missing value for key '" + e.key + "'");
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), e.key) == keys.end()) {
      throw ParseError(line_no, "unknown key '" + e.key + "'");
    }
    entries.push_back(std::move(e));
  }

  RunConfig cfg;
  std::optional<Entry> start_entry;
  std::optional<Entry> stop_entry;
  for (const auto& e : entries) {
    const auto& k = e.key;
    if (k == "B") {
      cfg.B = scalar(e, units_field());
    } else if (k == "E_perp") {
      cfg.e_perp = list(e, units_efield());
    } else if (k == "m_eff") {
      cfg.m_eff = scalar(e, units_mass());
    } else if (k == "g") {
      cfg.g_factor = scalar(e, units_none());
    } else if (k == "E_F") {
      cfg.material.E_F = scalar(e, units_energy());
    } else if (k == "tau") {
      cfg.material.tau_EF = scalar(e, units_time());
    } else if (k == "T") {
      cfg.material.temperature = scalar(e, units_temperature());
    } else if (k == "j_x") {
      cfg.material.j_x = scalar(e, units_current());
    } else if (k == "sweep_variable") {
      const auto& t = e.value.text;
      if (t == "energy") cfg.sweep.variable = SweepVariable::energy;
      else if (t == "B") cfg.sweep.variable = SweepVariable::B;
      else if (t == "E_perp") cfg.sweep.variable = SweepVariable::E_perp;
      else throw ParseError(e.line, "sweep_variable must be energy, B or E_perp, got '" + t + "'");
    } else if (k == "sweep_start") {
      start_entry = e;
    } else if (k == "sweep_stop") {
      stop_entry = e;
    } else if (k == "sweep_points") {
      cfg.sweep.points = integer(e);
    } else if (k == "sweep_spacing") {
      const auto& t = e.value.text;
      if (t == "linear") cfg.sweep.spacing = Spacing::linear;
      else if (t == "log") cfg.sweep.spacing = Spacing::log;
      else throw ParseError(e.line, "sweep_spacing must be linear or log, got '" + t + "'");
    } else if (k == "outputs") {
      static const std::set<std::string> allowed{"dos", "idos", "sigma", "rho", "E_y", "plateaus"};
      std::set<std::string> chosen;
      std::stringstream ss(e.value.text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto name = std::string(trim(item));
        if (name.empty()) continue;
        if (!allowed.count(name)) throw ParseError(e.line, "unknown output '" + name + "'");
        chosen.insert(name);
      }
      cfg.sweep.outputs = std::move(chosen);
    } else if (k == "k_max") {
      cfg.k_max = integer(e);
    } else if (k == "k_cap") {
      cfg.k_cap = integer(e);
    } else if (k == "tol") {
      cfg.tolerance = scalar(e, units_none());
    } else if (k == "spin") {
      cfg.spin = flag(e);
    } else if (k == "per_level") {
      cfg.per_level = flag(e);
    } else if (k == "si") {
      cfg.si = flag(e);
    } else if (k == "out") {
      cfg.out = e.value.text;
    }
  }

  // Sweep bounds depend on the sweep variable, which may appear later in the file.
  auto bound = [&](const Entry& e, double& value) {
    switch (cfg.sweep.variable) {
      case SweepVariable::energy:
        if (e.value.unit == "hwL") {
          if (e.value.numbers.size() != 1) throw ParseError(e.line, "expected one number");
          value = e.value.numbers.front();
          return true;
        }
        value = scalar(e, units_energy());
        return false;
      case SweepVariable::B:
        value = scalar(e, units_field());
        return false;
      case SweepVariable::E_perp:
        value = scalar(e, units_efield());
        return false;
    }
    return false;
  };
  if (start_entry || stop_entry) {
    if (cfg.sweep.variable != SweepVariable::energy && (!start_entry || !stop_entry)) {
      throw ParseError((start_entry ? start_entry : stop_entry)->line,
                       "sweep_start and sweep_stop must both be given for this sweep variable");
    }
    bool scaled_start = cfg.sweep.scaled_energy;
    bool scaled_stop = cfg.sweep.scaled_energy;
    if (start_entry) scaled_start = bound(*start_entry, cfg.sweep.start);
    if (stop_entry) scaled_stop = bound(*stop_entry, cfg.sweep.stop);
    if (scaled_start != scaled_stop) {
      throw ParseError((stop_entry ? stop_entry : start_entry)->line,
                       "sweep_start and sweep_stop must both be in hwL or both absolute");
    }
    cfg.sweep.scaled_energy = cfg.sweep.variable == SweepVariable::energy && scaled_start;
  } else if (cfg.sweep.variable != SweepVariable::energy) {
    throw ValidationError("sweep_start and sweep_stop are required when sweep_variable = " +
                          std::string(to_string(cfg.sweep.variable)));
  }

  cfg.material.spin = cfg.spin_treatment();
  validate(cfg, command);
  return cfg;
}

inline void validate(const RunConfig& cfg, std::optional<Command> command) {
  auto fail = [](const std::string& what) { throw ValidationError(what); };
  if (cfg.B && !(*cfg.B > 0.0)) fail("B must be positive");
  if (cfg.e_perp.empty()) fail("E_perp needs at least one value");
  for (double e : cfg.e_perp) {
    if (!(e >= 0.0)) fail("E_perp must be non-negative");
  }
  if (!(cfg.m_eff > 0.0)) fail("m_eff must be positive");
  if (!(cfg.g_factor >= 0.0)) fail("g must be non-negative");
  if (!(cfg.material.tau_EF > 0.0)) fail("tau must be positive");
  if (!(cfg.material.temperature >= 0.0)) fail("T must be non-negative");
  if (!(cfg.material.j_x >= 0.0)) fail("j_x must be non-negative");
  if (cfg.sweep.points < 2) fail("sweep_points must be at least 2");
  if (!(cfg.sweep.start < cfg.sweep.stop)) fail("sweep_start must be below sweep_stop");
  if (cfg.sweep.spacing == Spacing::log && !(cfg.sweep.start > 0.0)) {
    fail("log spacing needs sweep_start > 0");
  }
  if (cfg.k_max < 0) fail("k_max must be non-negative");
  if (cfg.k_cap < 0) fail("k_cap must be non-negative");
  if (!(cfg.tolerance > 0.0)) fail("tol must be positive");
  if (!command) return;

  switch (*command) {
    case Command::dos_sweep:
      if (!cfg.B) fail("dos-sweep needs B (crossed-field run)");
      if (cfg.sweep.variable == SweepVariable::B) fail("dos-sweep sweeps energy or E_perp, not B");
      for (double e : cfg.e_perp) {
        if (!(e > 0.0)) fail("dos-sweep needs E_perp > 0 (the E_perp = 0 comb has no smooth DOS)");
      }
      if (cfg.sweep.variable == SweepVariable::E_perp && !(cfg.sweep.start > 0.0)) {
        fail("E_perp sweep must start above 0");
      }
      break;
    case Command::hall_sweep:
      if (cfg.sweep.variable != SweepVariable::B) fail("hall-sweep needs sweep_variable = B");
      if (!(cfg.sweep.start > 0.0)) fail("hall-sweep B range must be positive");
      if (!(cfg.material.E_F > 0.0)) fail("hall-sweep needs E_F > 0");
      break;
    case Command::filling_table:
      break;
    case Command::breakdown:
      if (!cfg.B) fail("breakdown needs B");
      if (cfg.k_max < 1) fail("breakdown needs k_max >= 1");
      break;
  }
}

/// Canonical text form; parse_config(config_echo(c)) == c.
inline std::string config_echo(const RunConfig& cfg) {
  std::ostringstream os;
  auto line = [&](const std::string& key, const std::string& value) { os << key << " = " << value << '\n'; };
  if (cfg.B) line("B", format_number(*cfg.B) + " T");
  {
    std::string v;
    for (std::size_t i = 0; i < cfg.e_perp.size(); ++i) {
      if (i) v += ", ";
      v += format_number(cfg.e_perp[i]);
    }
    line("E_perp", v + " V/m");
  }
  line("m_eff", format_number(cfg.m_eff) + " kg");
  line("g", format_number(cfg.g_factor));
  line("E_F", format_number(cfg.material.E_F) + " J");
  line("tau", format_number(cfg.material.tau_EF) + " s");
  line("T", format_number(cfg.material.temperature) + " K");
  line("j_x", format_number(cfg.material.j_x) + " A/m");
  line("sweep_variable", to_string(cfg.sweep.variable));
  std::string unit;
  switch (cfg.sweep.variable) {
    case SweepVariable::energy: unit = cfg.sweep.scaled_energy ? " hwL" : " J"; break;
    case SweepVariable::B: unit = " T"; break;
    case SweepVariable::E_perp: unit = " V/m"; break;
  }
  line("sweep_start", format_number(cfg.sweep.start) + unit);
  line("sweep_stop", format_number(cfg.sweep.stop) + unit);
  line("sweep_points", std::to_string(cfg.sweep.points));
  line("sweep_spacing", cfg.sweep.spacing == Spacing::log ? "log" : "linear");
  {
    std::string v;
    for (const auto& o : cfg.sweep.outputs) {
      if (!v.empty()) v += ", ";
      v += o;
    }
    if (!v.empty()) line("outputs", v);
  }
  line("k_max", std::to_string(cfg.k_max));
  line("k_cap", std::to_string(cfg.k_cap));
  line("tol", format_number(cfg.tolerance));
  line("spin", cfg.spin ? "on" : "off");
  line("per_level", cfg.per_level ? "on" : "off");
  line("si", cfg.si ? "on" : "off");
  line("out", cfg.out);
  return os.str();
}

}  // namespace qhall::config

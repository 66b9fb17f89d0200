#include "nufocus/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "nufocus/errors.hpp"

namespace nufocus {
namespace {

using units::Quantity;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// One settable key. `set` parses text into the config, `get` prints it in
// canonical units.
struct Field {
  std::string section;
  std::string name;
  std::function<void(SimulationConfig&, const std::string&)> set;
  std::function<std::string(const SimulationConfig&)> get;

  std::string key() const { return section + "." + name; }
};

template <class T>
Field quantity_field(std::string section, std::string name, Quantity kind,
                     T SimulationConfig::*group, double T::*member) {
  return Field{
      std::move(section), std::move(name),
      [=](SimulationConfig& c, const std::string& v) { (c.*group).*member = units::parse_quantity(v, kind); },
      [=](const SimulationConfig& c) { return units::format_quantity((c.*group).*member, kind); }};
}

template <class T>
Field int_field(std::string section, std::string name, T SimulationConfig::*group, int T::*member) {
  return Field{
      std::move(section), std::move(name),
      [=](SimulationConfig& c, const std::string& v) {
        const double x = units::parse_quantity(v, Quantity::count);
        if (std::abs(x) > 2e9) throw std::invalid_argument("integer out of range: '" + v + "'");
        (c.*group).*member = static_cast<int>(x);
      },
      [=](const SimulationConfig& c) { return std::to_string((c.*group).*member); }};
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

std::string format_value_list(const std::vector<double>& values, Quantity kind) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += units::format_quantity(values[i], kind);
  }
  return out;
}

const std::vector<Field>& fields() {
  using C = SimulationConfig;
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(quantity_field("dot", "g_factor", Quantity::dimensionless, &C::dot, &DotParams::g_factor));
    f.push_back(quantity_field("dot", "B_field", Quantity::field, &C::dot, &DotParams::B_field));
    f.push_back(quantity_field("dot", "T2_electron", Quantity::time, &C::dot, &DotParams::T2_electron));
    f.push_back(quantity_field("dot", "T_R", Quantity::time, &C::dot, &DotParams::T_R));

    f.push_back(quantity_field("pulse", "area", Quantity::angle, &C::pulse, &PulseParams::area));
    f.push_back(quantity_field("pulse", "bandwidth_fwhm", Quantity::energy, &C::pulse, &PulseParams::bandwidth_fwhm));
    f.push_back(quantity_field("pulse", "detuning", Quantity::energy, &C::pulse, &PulseParams::detuning));
    f.push_back(quantity_field("pulse", "retardance", Quantity::angle, &C::pulse, &PulseParams::retardance));
    f.push_back(int_field("pulse", "helicity_sign", &C::pulse, &PulseParams::helicity_sign));

    f.push_back(quantity_field("bath", "A_hyperfine", Quantity::energy, &C::bath, &BathParams::A_hyperfine));
    f.push_back(int_field("bath", "N_nuclei", &C::bath, &BathParams::N_nuclei));
    f.push_back(quantity_field("bath", "gamma_depol", Quantity::rate, &C::bath, &BathParams::gamma_depol));
    f.push_back(quantity_field("bath", "n_window", Quantity::dimensionless, &C::bath, &BathParams::n_window));

    f.push_back(quantity_field("numerics", "window_tau", Quantity::dimensionless, &C::numerics, &Numerics::window_tau));
    f.push_back(int_field("numerics", "initial_steps_per_tau", &C::numerics, &Numerics::initial_steps_per_tau));
    f.push_back(int_field("numerics", "max_refinements", &C::numerics, &Numerics::max_refinements));
    f.push_back(quantity_field("numerics", "refine_tol", Quantity::dimensionless, &C::numerics, &Numerics::refine_tol));
    f.push_back(quantity_field("numerics", "unitarity_tol", Quantity::dimensionless, &C::numerics, &Numerics::unitarity_tol));
    f.push_back(quantity_field("numerics", "omega_min", Quantity::frequency, &C::numerics, &Numerics::omega_min));
    f.push_back(Field{"numerics", "use_cache",
                      [](C& c, const std::string& v) { c.numerics.use_cache = parse_bool(v); },
                      [](const C& c) { return std::string(c.numerics.use_cache ? "true" : "false"); }});
    f.push_back(quantity_field("numerics", "cache_step_fraction", Quantity::dimensionless, &C::numerics, &Numerics::cache_step_fraction));
    f.push_back(quantity_field("numerics", "interp_tol", Quantity::dimensionless, &C::numerics, &Numerics::interp_tol));
    f.push_back(int_field("numerics", "drift_samples_per_psc", &C::numerics, &Numerics::drift_samples_per_psc));
    f.push_back(int_field("numerics", "scan_N_nuclei", &C::numerics, &Numerics::scan_N_nuclei));
    f.push_back(quantity_field("numerics", "residual_tol", Quantity::dimensionless, &C::numerics, &Numerics::residual_tol));

    // The scan values depend on the axis unit, so `axis` must be applied
    // before `values`; load order below guarantees that.
    f.push_back(Field{"scan", "axis",
                      [](C& c, const std::string& v) { c.scan.axis = parse_scan_axis(v); },
                      [](const C& c) { return std::string(to_string(c.scan.axis)); }});
    f.push_back(Field{"scan", "values",
                      [](C& c, const std::string& v) {
                        c.scan.values = units::parse_value_list(v, axis_quantity(c.scan.axis));
                      },
                      [](const C& c) { return format_value_list(c.scan.values, axis_quantity(c.scan.axis)); }});

    f.push_back(Field{"output", "path", [](C& c, const std::string& v) { c.output.path = v; },
                      [](const C& c) { return c.output.path; }});
    f.push_back(Field{"output", "format", [](C& c, const std::string& v) { c.output.format = v; },
                      [](const C& c) { return c.output.format; }});
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key() == key) return &f;
  }
  return nullptr;
}

// Parses the file body into ordered (key, value, line) entries.
struct Entry {
  std::string key;
  std::string value;
  int line;
};

std::vector<Entry> parse_entries(std::string_view text) {
  std::vector<Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("", "line " + std::to_string(line_no) + ": unterminated section header");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      static const char* known[] = {"dot", "pulse", "bath", "numerics", "scan", "output"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known)) {
        throw ConfigError(section, "line " + std::to_string(line_no) + ": unknown section");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    if (section.empty()) {
      throw ConfigError("", "line " + std::to_string(line_no) + ": key outside of any section");
    }
    const std::string name = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    entries.push_back({section + "." + name, value, line_no});
  }
  return entries;
}

void apply(SimulationConfig& config, const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError(key, "unknown key");
  try {
    f->set(config, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

void require(bool ok, const char* key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

std::string_view to_string(ScanAxis axis) {
  switch (axis) {
    case ScanAxis::none: return "none";
    case ScanAxis::detuning: return "detuning";
    case ScanAxis::area: return "area";
    case ScanAxis::B_field: return "B_field";
    case ScanAxis::retardance: return "retardance";
  }
  return "none";
}

ScanAxis parse_scan_axis(std::string_view name) {
  for (auto a : {ScanAxis::none, ScanAxis::detuning, ScanAxis::area, ScanAxis::B_field, ScanAxis::retardance}) {
    if (to_string(a) == name) return a;
  }
  if (name.empty()) return ScanAxis::none;
  throw std::invalid_argument("unknown scan axis '" + std::string(name) +
                              "' (expected detuning, area, B_field, retardance or none)");
}

units::Quantity axis_quantity(ScanAxis axis) {
  switch (axis) {
    case ScanAxis::detuning: return Quantity::energy;
    case ScanAxis::area: return Quantity::angle;
    case ScanAxis::B_field: return Quantity::field;
    case ScanAxis::retardance: return Quantity::angle;
    case ScanAxis::none: return Quantity::dimensionless;
  }
  return Quantity::dimensionless;
}

SimulationConfig parse_config(std::string_view text, std::span<const std::string> overrides) {
  auto entries = parse_entries(text);

  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError(o, "override must look like section.key=value");
    const std::string key = trim(std::string_view(o).substr(0, eq));
    if (key.find('.') == std::string::npos) throw ConfigError(key, "override key must be section.key");
    entries.push_back({key, trim(std::string_view(o).substr(eq + 1)), 0});
  }

  // Last assignment of a key wins; scan.axis is applied before scan.values.
  std::map<std::string, std::string> last;
  for (const auto& e : entries) last[e.key] = e.value;

  SimulationConfig config;
  if (auto it = last.find("scan.axis"); it != last.end()) apply(config, it->first, it->second);
  for (const auto& [key, value] : last) {
    if (key == "scan.axis") continue;
    apply(config, key, value);
  }
  validate(config);
  return config;
}

SimulationConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

std::string serialize(const SimulationConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.name << " = " << f.get(config) << '\n';
  }
  return out.str();
}

void validate(const SimulationConfig& c) {
  auto finite = [](double x) { return std::isfinite(x); };

  require(finite(c.dot.g_factor) && c.dot.g_factor > 0, "dot.g_factor", "must be > 0");
  require(finite(c.dot.B_field) && c.dot.B_field >= 0, "dot.B_field", "must be >= 0");
  require(c.dot.T2_electron > 0, "dot.T2_electron", "must be > 0");
  require(finite(c.dot.T_R) && c.dot.T_R > 0, "dot.T_R", "must be > 0");

  require(finite(c.pulse.area) && c.pulse.area >= 0, "pulse.area", "must be >= 0");
  require(finite(c.pulse.bandwidth_fwhm) && c.pulse.bandwidth_fwhm > 0, "pulse.bandwidth_fwhm", "must be > 0");
  require(finite(c.pulse.detuning), "pulse.detuning", "must be finite");
  require(c.pulse.retardance >= 0 && c.pulse.retardance <= units::pi, "pulse.retardance",
          "must lie in [0, pi]");
  require(c.pulse.helicity_sign == 1 || c.pulse.helicity_sign == -1, "pulse.helicity_sign", "must be +1 or -1");

  require(finite(c.bath.A_hyperfine) && c.bath.A_hyperfine > 0, "bath.A_hyperfine", "must be > 0");
  require(c.bath.N_nuclei >= 2 && c.bath.N_nuclei % 2 == 0, "bath.N_nuclei",
          "must be an even count >= 2 (polarization grid steps by 2/N around n = 0)");
  require(finite(c.bath.gamma_depol) && c.bath.gamma_depol >= 0, "bath.gamma_depol", "must be >= 0");
  require(c.bath.n_window > 0 && c.bath.n_window <= 1, "bath.n_window", "must lie in (0, 1]");

  const auto& n = c.numerics;
  require(n.window_tau > 0, "numerics.window_tau", "must be > 0");
  require(n.initial_steps_per_tau > 0, "numerics.initial_steps_per_tau", "must be > 0");
  require(n.max_refinements >= 0, "numerics.max_refinements", "must be >= 0");
  require(n.refine_tol > 0, "numerics.refine_tol", "must be > 0");
  require(n.unitarity_tol > 0, "numerics.unitarity_tol", "must be > 0");
  require(n.omega_min > 0, "numerics.omega_min", "must be > 0");
  require(n.cache_step_fraction > 0, "numerics.cache_step_fraction", "must be > 0");
  require(n.interp_tol > 0, "numerics.interp_tol", "must be > 0");
  require(n.drift_samples_per_psc > 0, "numerics.drift_samples_per_psc", "must be > 0");
  require(n.scan_N_nuclei >= 2 && n.scan_N_nuclei % 2 == 0, "numerics.scan_N_nuclei",
          "must be an even count >= 2");
  require(n.residual_tol > 0, "numerics.residual_tol", "must be > 0");

  if (c.scan.axis == ScanAxis::none) {
    require(c.scan.values.empty(), "scan.values", "values given but scan.axis is none");
  } else {
    require(!c.scan.values.empty(), "scan.values", "axis set but no values");
    for (double v : c.scan.values) {
      switch (c.scan.axis) {
        case ScanAxis::area: require(v >= 0, "scan.values", "area values must be >= 0"); break;
        case ScanAxis::B_field: require(v >= 0, "scan.values", "B_field values must be >= 0"); break;
        case ScanAxis::retardance:
          require(v >= 0 && v <= units::pi, "scan.values", "retardance values must lie in [0, pi]");
          break;
        default: break;
      }
    }
  }
  require(c.output.format == "csv", "output.format", "only 'csv' is supported");
  require(!c.output.path.empty(), "output.path", "must not be empty");
}

double pulse_duration_from_bandwidth(double bandwidth_fwhm) {
  // The sech(t/tau) field has spectrum ~ sech(pi*omega*tau/2); its intensity
  // falls to half at pi*omega*tau/2 = arcsech(1/sqrt2) = asinh(1).
  return 4.0 * std::asinh(1.0) / units::pi * units::hbar / bandwidth_fwhm;
}

double zeeman_frequency(const DotParams& dot) {
  return dot.g_factor * units::bohr_magneton * dot.B_field / units::hbar;
}

double precession_frequency(double n, const DotParams& dot, const BathParams& bath, double omega_min) {
  const double omega = zeeman_frequency(dot) + n * bath.A_hyperfine / units::hbar;
  if (!(omega > omega_min)) {
    std::ostringstream msg;
    msg << "precession frequency " << units::angular_to_GHz(omega) << " GHz at n = " << n
        << " is below the " << units::angular_to_GHz(omega_min)
        << " GHz guard; narrow bath.n_window or raise dot.B_field";
    throw NonpositiveFrequency(msg.str());
  }
  return omega;
}

}  // namespace nufocus

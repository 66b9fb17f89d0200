#include "nufocus/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "nufocus/errors.hpp"

#ifndef NUFOCUS_VERSION
#define NUFOCUS_VERSION "0.0.0"
#endif

namespace nufocus::io {
namespace {

// Shortest representation that reads back to the same double.
std::string fmt(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

class CsvFile {
 public:
  explicit CsvFile(const std::filesystem::path& path) : path_(path), out_(path) {
    if (!out_) throw ConfigError("output.path", "cannot open " + path.string() + " for writing");
  }

  template <class... Cols>
  void header(const Cols&... cols) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cols, first = false), ...);
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      out_ << (first ? "" : ",") << fmt(v);
      first = false;
    }
    out_ << '\n';
  }

  std::ostream& raw() { return out_; }

  ~CsvFile() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0) throw ConfigError("output.path", "write to " + path_.string() + " failed");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace

std::string version() { return NUFOCUS_VERSION; }

std::string config_hash(const SimulationConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize(config)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_spin_csv(const std::filesystem::path& path, std::span<const double> omegas,
                    std::span<const BlochState> states) {
  if (omegas.size() != states.size()) throw MisalignedTables("spin table and frequency grid differ in length");
  CsvFile f(path);
  f.header("omega_over_2pi_GHz", "Sx", "Sy", "Sz", "rho_TT");
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i].s;
    f.row({units::angular_to_GHz(omegas[i]), 0.5 * s[0], 0.5 * s[1], 0.5 * s[2], states[i].trion_yield});
  }
}

void write_rates_csv(const std::filesystem::path& path, const PolarizationGrid& grid, const FlipRates& rates) {
  const auto drift = mean_drift(grid, rates);
  CsvFile f(path);
  f.header("n", "w_plus", "w_minus", "alpha_plus", "alpha_minus", "Sx", "rho_TT", "drift");
  for (std::size_t k = 0; k < rates.size(); ++k) {
    f.row({grid.n(k), rates.w_plus[k], rates.w_minus[k], rates.alpha_plus[k], rates.alpha_minus[k],
           0.5 * rates.s_x[k], rates.rho_tt[k], drift[k]});
  }
}

void write_distribution_csv(const std::filesystem::path& path, const PolarizationGrid& grid,
                            std::span<const double> p, std::span<const double> omegas) {
  if (p.size() != grid.size() || omegas.size() != grid.size()) {
    throw MisalignedTables("distribution and frequency table do not match the grid");
  }
  CsvFile f(path);
  f.header("n", "P", "omega_over_2pi_GHz");
  for (std::size_t k = 0; k < p.size(); ++k) f.row({grid.n(k), p[k], units::angular_to_GHz(omegas[k])});
}

void write_observables_csv(const std::filesystem::path& path, ScanAxis axis, std::span<const ObservableRow> rows) {
  const auto kind = axis_quantity(axis);
  std::string first = axis == ScanAxis::none ? "scan_value" : std::string(to_string(axis));
  const auto unit = canonical_unit(kind);
  if (axis != ScanAxis::none && !unit.empty()) first += "_" + std::string(unit);

  CsvFile f(path);
  f.header(first, "mean_n", "variance_n", "freq_shift_GHz", "amplitude", "psc_coherence", "status",
           "distribution_ref");
  for (const auto& r : rows) {
    f.raw() << fmt(r.scan_value) << ',' << fmt(r.mean_n) << ',' << fmt(r.variance_n) << ','
            << fmt(r.freq_shift_GHz) << ',' << fmt(r.amplitude) << ',' << fmt(r.psc_coherence) << ','
            << r.status << ',' << r.distribution_ref << '\n';
  }
}

void write_drift_csv(const std::filesystem::path& path, std::span<const DriftSample> samples) {
  CsvFile f(path);
  f.header("n", "omega_over_2pi_GHz", "w_plus", "w_minus", "drift");
  for (const auto& s : samples) f.row({s.n, units::angular_to_GHz(s.omega), s.w_plus, s.w_minus, s.drift});
}

void write_evolution_csv(const std::filesystem::path& path, const PolarizationGrid& grid, const Trajectory& tr) {
  CsvFile f(path);
  f.header("t_s", "mean_n", "variance_n");
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const auto m = moments(grid, tr.p[i].p);
    f.row({tr.t[i], m.mean, m.variance});
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const PolarizationGrid& grid, const Trajectory& tr) {
  CsvFile f(path);
  f.header("t_s", "n", "P");
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    for (std::size_t k = 0; k < grid.size(); ++k) f.row({tr.t[i], grid.n(k), tr.p[i].p[k]});
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw ConfigError("output.path", "cannot write " + path.string());
}

std::string manifest_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["version"] = version();
  j["config_hash"] = config_hash(m.config);
  j["N_nuclei_used"] = m.N_nuclei_used;
  j["kernels"] = m.kernels;
  j["outputs"] = m.outputs;
  j["config"] = serialize(m.config);
  return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) { write_text(path, manifest_json(m)); }

}  // namespace nufocus::io

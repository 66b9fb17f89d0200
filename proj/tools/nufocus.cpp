// nufocus: command-line front end for the pulse, spin, nuclear and scan stages.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nufocus/config.hpp"
#include "nufocus/errors.hpp"
#include "nufocus/io.hpp"
#include "nufocus/kernels/kernels.hpp"
#include "nufocus/nuclear.hpp"
#include "nufocus/parallel.hpp"
#include "nufocus/pipeline.hpp"
#include "nufocus/propagator.hpp"
#include "nufocus/spin.hpp"

namespace fs = std::filesystem;
using namespace nufocus;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  std::optional<int> threads;
  bool full_N = false;
};

struct Context {
  SimulationConfig config;
  fs::path out;
  int threads = 1;
  int N = 0;
};

Context make_context(const Common& c, std::vector<std::string> extra_sets = {}) {
  std::vector<std::string> sets = c.sets;
  sets.insert(sets.end(), extra_sets.begin(), extra_sets.end());
  if (!c.out.empty()) sets.push_back("output.path=" + c.out);

  Context ctx;
  ctx.config = c.config_path.empty() ? parse_config("", sets) : load_config(c.config_path, sets);
  ctx.out = ctx.config.output.path;
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw ConfigError("output.path", "cannot create directory " + ctx.out.string() + ": " + ec.message());
  if (c.threads && *c.threads < 1) throw ConfigError("threads", "must be >= 1");
  ctx.threads = resolve_threads(c.threads);
  ctx.N = c.full_N ? ctx.config.bath.N_nuclei : ctx.config.numerics.scan_N_nuclei;
  return ctx;
}

void finish(const Context& ctx, const std::string& command, std::vector<std::string> outputs) {
  io::Manifest m;
  m.command = command;
  m.config = ctx.config;
  m.N_nuclei_used = ctx.N;
  m.outputs = std::move(outputs);
  m.kernels = std::string(kernels::name(kernels::active().isa));
  io::write_manifest(ctx.out / "manifest.json", m);
  for (const auto& o : m.outputs) std::cout << "wrote " << (ctx.out / o).string() << '\n';
  std::cout << "wrote " << (ctx.out / "manifest.json").string() << '\n';
}

double parse_frequency_option(const std::string& text, const char* key) {
  try {
    return units::parse_quantity(text, units::Quantity::frequency);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

PipelineResult pipeline_with_N(const Context& ctx) {
  PipelineOptions opts;
  opts.N_nuclei = ctx.N;
  opts.threads = ctx.threads;
  return run_pipeline(ctx.config, opts);
}

void cmd_propagator(const Context& ctx, const std::string& omega_text) {
  const double omega = omega_text.empty() ? zeeman_frequency(ctx.config.dot)
                                          : parse_frequency_option(omega_text, "omega");
  const auto u = propagate_pulse(ctx.config.pulse, omega, IntegratorOptions::from(ctx.config.numerics));
  io::write_text(ctx.out / "propagator.json", propagator_to_json(u) + "\n");
  const auto a = asymmetry_or_unity(u);
  std::printf("omega/2pi = %.6f GHz  alpha_plus = %.9f  alpha_minus = %.9f  unitarity defect = %.3g\n",
              units::angular_to_GHz(omega), a.alpha_plus, a.alpha_minus, unitarity_defect(u.matrix));
  finish(ctx, "propagator", {"propagator.json"});
}

void cmd_spin(const Context& ctx, const std::string& range) {
  std::vector<double> omegas;
  if (range.empty()) {
    const double w0 = zeeman_frequency(ctx.config.dot);
    const double psc = psc_spacing(ctx.config.dot);
    const int per = ctx.config.numerics.drift_samples_per_psc;
    for (int i = -per; i <= per; ++i) omegas.push_back(w0 + psc * i / per);
  } else {
    try {
      omegas = units::parse_value_list(range, units::Quantity::frequency);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("range", e.what());
    }
  }
  const auto g = spin_on_grid(ctx.config, omegas, ctx.threads);
  io::write_spin_csv(ctx.out / "spin.csv", g.omega, g.spin);
  finish(ctx, "spin", {"spin.csv"});
}

void cmd_rates(const Context& ctx, double drift_window) {
  auto config = ctx.config;
  config.bath.N_nuclei = ctx.N;
  validate(config);
  const auto grid = PolarizationGrid::make(config.bath, config.dot, config.numerics.omega_min);
  std::vector<double> omegas(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    omegas[k] = precession_frequency(grid.n(k), config.dot, config.bath, config.numerics.omega_min);
  const auto g = spin_on_grid(config, omegas, ctx.threads);
  const auto rates = flip_rates(grid, omegas, g.spin, g.alpha, config.bath, config.dot);
  io::write_rates_csv(ctx.out / "rates.csv", grid, rates);
  std::vector<std::string> outputs{"rates.csv"};
  if (drift_window > 0) {
    const auto d = drift_curve(config, ctx.N, -drift_window, drift_window, ctx.threads);
    io::write_drift_csv(ctx.out / "drift.csv", d);
    outputs.push_back("drift.csv");
  }
  finish(ctx, "rates", outputs);
}

void cmd_distribution(const Context& ctx) {
  const auto r = pipeline_with_N(ctx);
  io::write_rates_csv(ctx.out / "rates.csv", r.grid, r.rates);
  io::write_distribution_csv(ctx.out / "distribution.csv", r.grid, r.distribution.p, r.spin.omega);
  const auto m = moments(r.grid, r.distribution.p);
  std::printf("mean_n = %.6g  variance_n = %.6g\n", m.mean, m.variance);
  finish(ctx, "distribution", {"rates.csv", "distribution.csv"});
}

struct EvolveArgs {
  std::optional<double> dt;
  long steps = 1000;
  long record_every = 0;
  std::string init = "binomial";
  double n0 = 0.0;
  std::string from;
  bool snapshots = false;
};

std::vector<double> read_distribution_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("from", "cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<double> p;
  while (std::getline(in, line)) {
    const auto a = line.find(',');
    if (a == std::string::npos) continue;
    p.push_back(std::stod(line.substr(a + 1)));
  }
  return p;
}

void cmd_evolve(const Context& ctx, const EvolveArgs& a) {
  const auto r = pipeline_with_N(ctx);
  NuclearDistribution p0;
  if (!a.from.empty()) {
    p0.p = read_distribution_csv(a.from);
    if (p0.p.size() != r.grid.size()) {
      throw ConfigError("from", "distribution has " + std::to_string(p0.p.size()) + " rows, grid has " +
                                    std::to_string(r.grid.size()));
    }
  } else if (a.init == "binomial") {
    p0 = binomial_distribution(r.grid);
  } else if (a.init == "delta") {
    p0 = delta_distribution(r.grid, a.n0);
  } else if (a.init == "steady") {
    p0 = r.distribution;
  } else {
    throw ConfigError("init", "expected binomial, delta or steady");
  }
  const double limit = max_stable_dt(chain_rates(r.grid, r.rates));
  const double dt = a.dt ? *a.dt : 0.4 * limit;
  const long every = a.record_every > 0 ? a.record_every : std::max(1L, a.steps / 200);
  const auto tr = evolve_distribution(r.grid, r.rates, p0, dt, a.steps, every);
  io::write_evolution_csv(ctx.out / "evolution.csv", r.grid, tr);
  std::vector<std::string> outputs{"evolution.csv"};
  if (a.snapshots) {
    io::write_trajectory_csv(ctx.out / "trajectory.csv", r.grid, tr);
    outputs.push_back("trajectory.csv");
  }
  std::printf("dt = %.6g s (stability limit %.6g s), %ld steps\n", dt, limit, a.steps);
  finish(ctx, "evolve", outputs);
}

void cmd_scan(const Context& ctx, bool dump) {
  if (dump) fs::create_directories(ctx.out / "distributions");
  PipelineOptions opts;
  opts.N_nuclei = ctx.N;
  opts.threads = ctx.threads;
  std::vector<std::string> outputs;
  const auto rows = scan(ctx.config, opts, [&](std::size_t i, const PipelineResult& r, ObservableRow& row) {
    if (dump) {
      char name[64];
      std::snprintf(name, sizeof name, "distributions/point_%03zu.csv", i);
      io::write_distribution_csv(ctx.out / name, r.grid, r.distribution.p, r.spin.omega);
      row.distribution_ref = name;
      outputs.push_back(name);
    }
    std::fprintf(stderr, "point %zu: shift %.6g GHz, mean_n %.6g\n", i, row.freq_shift_GHz, row.mean_n);
  });
  io::write_observables_csv(ctx.out / "observables.csv", ctx.config.scan.axis, rows);
  outputs.insert(outputs.begin(), "observables.csv");
  finish(ctx, "scan", outputs);
}

void cmd_pipeline(const Context& ctx) {
  const auto r = pipeline_with_N(ctx);
  io::write_spin_csv(ctx.out / "spin.csv", r.spin.omega, r.spin.spin);
  io::write_rates_csv(ctx.out / "rates.csv", r.grid, r.rates);
  io::write_distribution_csv(ctx.out / "distribution.csv", r.grid, r.distribution.p, r.spin.omega);
  const ObservableRow rows[] = {r.row};
  io::write_observables_csv(ctx.out / "observables.csv", ScanAxis::none, rows);
  std::printf("mean_n = %.6g  freq_shift = %.6g GHz  amplitude = %.6g  (%s)\n", r.row.mean_n,
              r.row.freq_shift_GHz, r.row.amplitude, r.row.status.c_str());
  finish(ctx, "pipeline", {"spin.csv", "rates.csv", "distribution.csv", "observables.csv"});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nuclear spin polarization and focusing in a quantum dot under a detuned pulse train", "nufocus"};
  app.set_version_flag("--version", io::version());
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("-c,--config", common.config_path, "Config file (sections dot, pulse, bath, numerics, scan, output)");
  app.add_option("--set", common.sets, "Override a config key: section.key=value (repeatable)");
  app.add_option("-o,--out", common.out, "Output directory (overrides output.path)");
  app.add_option("-j,--threads", common.threads, "Worker threads (default: NUFOCUS_THREADS or all cores)");
  app.add_flag("--full-N", common.full_N, "Use bath.N_nuclei instead of the desk-scale numerics.scan_N_nuclei");

  auto* prop = app.add_subcommand("propagator", "Single-pulse propagator as JSON, with alpha_pm");
  std::string omega_text;
  prop->add_option("--omega", omega_text, "Precession frequency (e.g. 12GHz); default is the bare Zeeman frequency");

  auto* spin = app.add_subcommand("spin", "Steady-state electron spin versus precession frequency");
  std::string range;
  spin->add_option("--range", range, "Frequencies start:stop:step or a list (e.g. 11.9GHz:12.1GHz:1MHz)");

  auto* rates = app.add_subcommand("rates", "Nuclear flip rates and drift on the polarization grid");
  double drift_window = 0.0;
  rates->add_option("--drift-window", drift_window, "Also sample the drift finely over |n| <= this value");

  auto* dist = app.add_subcommand("distribution", "Stationary nuclear polarization distribution");

  auto* evolve = app.add_subcommand("evolve", "Time evolution of the nuclear distribution");
  EvolveArgs ev;
  evolve->add_option("--dt", ev.dt, "Time step in seconds (default: 0.4 of the stability limit)");
  evolve->add_option("--steps", ev.steps, "Number of steps")->capture_default_str();
  evolve->add_option("--record-every", ev.record_every, "Record every k steps (default: about 200 records)");
  evolve->add_option("--init", ev.init, "Initial distribution: binomial, delta or steady")->capture_default_str();
  evolve->add_option("--n0", ev.n0, "Polarization of the delta initial distribution")->capture_default_str();
  evolve->add_option("--from", ev.from, "Initial distribution from a distribution CSV");
  evolve->add_flag("--snapshots", ev.snapshots, "Also write every recorded P(n)");

  auto* sc = app.add_subcommand("scan", "Pipeline observables across a parameter axis");
  std::string axis, values;
  bool dump = false;
  sc->add_option("--axis", axis, "detuning, area, B_field, retardance or none (overrides scan.axis)");
  sc->add_option("--values", values, "Axis values start:stop:step or a list, with units (overrides scan.values)");
  sc->add_flag("--dump-distributions", dump, "Write P(n) for every point");

  auto* pipe = app.add_subcommand("pipeline", "Full pipeline at one parameter point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*prop) {
      cmd_propagator(make_context(common), omega_text);
    } else if (*spin) {
      cmd_spin(make_context(common), range);
    } else if (*rates) {
      cmd_rates(make_context(common), drift_window);
    } else if (*dist) {
      cmd_distribution(make_context(common));
    } else if (*evolve) {
      cmd_evolve(make_context(common), ev);
    } else if (*sc) {
      std::vector<std::string> extra;
      if (!axis.empty()) extra.push_back("scan.axis=" + axis);
      if (!values.empty()) extra.push_back("scan.values=" + values);
      cmd_scan(make_context(common, extra), dump);
    } else if (*pipe) {
      cmd_pipeline(make_context(common));
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", e.tag().c_str(), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: InternalError: %s\n", e.what());
    return 2;
  }
  return 0;
}

// zonenet command-line driver. Every subcommand writes its artifacts plus a
// run manifest into the output directory (forecast_manifest.json when forecast
// writes next to the infer outputs, run_manifest.json otherwise).

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "manifest.hpp"
#include "zonenet/benchmark.hpp"
#include "zonenet/calibration.hpp"
#include "zonenet/config.hpp"
#include "zonenet/csv.hpp"
#include "zonenet/export.hpp"
#include "zonenet/moving_window.hpp"
#include "zonenet/setup.hpp"

namespace fs = std::filesystem;
using namespace zonenet;

namespace {

enum ExitCode { kOk = 0, kRuntime = 1, kUsage = 2, kData = 3, kConfig = 4 };

std::string quoted(const std::string& s) {
  std::ostringstream o;
  o << std::quoted(s);
  return o.str();
}

std::pair<double, double> parse_interval(const std::string& text, const std::string& flag) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument("");
    std::size_t used = 0;
    const double a = std::stod(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("");
    const std::string rest = text.substr(colon + 1);
    const double b = std::stod(rest, &used);
    if (used != rest.size() || !(b > a)) throw std::invalid_argument("");
    return {a, b};
  } catch (const std::exception&) {
    throw CLI::ValidationError(flag, "expected start:end with end > start, got '" + text + "'");
  }
}

fs::path default_out(const std::string& leaf) {
  if (const char* env = std::getenv("ZONENET_OUT_DIR"); env && *env) return fs::path(env) / leaf;
  return fs::path("out") / leaf;
}

fs::path prepare_dir(const std::string& given, const std::string& leaf) {
  const fs::path dir = given.empty() ? default_out(leaf) : fs::path(given);
  fs::create_directories(dir);
  return dir;
}

fs::path data_file(const std::string& given) {
  const fs::path p(given);
  return fs::is_directory(p) ? p / "observed.csv" : p;
}

Dataset read_dataset(const fs::path& path, const Setup& setup) {
  const auto table = load_sensor_csv(path, setup.config.sensors, zone_ids(setup.network));
  try {
    return to_dataset(table, setup.network);
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string(), 0, "", e.what());
  }
}

void copy_input(const fs::path& from, const fs::path& to) {
  if (fs::exists(to) && fs::equivalent(from, to)) return;
  fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

// ---- simulate --------------------------------------------------------------

struct SimulateOpts {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma_co2, sigma_temp;
};

int run_simulate(const SimulateOpts& o) {
  Setup setup(load_config(o.config));
  if (!setup.truth) throw ConfigError(o.config + "#/truth", "simulate needs a ground truth");
  NoiseSpec noise = setup.config.generation.noise;
  if (o.seed) noise.seed = *o.seed;
  if (o.sigma_co2) noise.sigma_co2 = *o.sigma_co2;
  if (o.sigma_temp) noise.sigma_temp = *o.sigma_temp;

  const auto& g = setup.config.generation;
  const Dataset d = generate_synthetic(setup.model, *setup.truth, g.duration, g.sample_dt, noise);
  const fs::path dir = prepare_dir(o.out, "simulate");
  write_sensor_csv(dir / "observed.csv", to_table(d, setup.network), setup.config.sensors);
  write_sensor_csv(dir / "noiseless.csv", to_table(d, setup.network, true), setup.config.sensors);

  cli::RunManifest m;
  m.command = "simulate";
  m.seed = noise.seed;
  m.input_hashes["config"] = cli::sha256_file(o.config);
  m.settings = {{"sigma_co2", noise.sigma_co2}, {"sigma_temp", noise.sigma_temp},
                {"duration", g.duration}, {"sample_dt", g.sample_dt}};
  cli::write_manifest(dir, m);
  spdlog::info("wrote {} samples to {}", d.sample_count(), dir.string());
  return kOk;
}

// ---- infer -----------------------------------------------------------------

struct InferOpts {
  std::string data, config, out;
  std::optional<std::uint64_t> seed, iterations, burn_in, draws, size, step, horizon;
  std::size_t first_window = 0;
  std::optional<std::size_t> max_windows;
  bool full_scale = false;
};

int run_infer(const InferOpts& o) {
  ProjectConfig cfg = load_config(o.config);
  if (o.full_scale) {
    cfg.ram.iterations = 100000;
    cfg.ram.burn_in = 50000;
  }
  if (o.iterations) cfg.ram.iterations = *o.iterations;
  if (o.burn_in) cfg.ram.burn_in = *o.burn_in;
  if (o.seed) cfg.ram.seed = *o.seed;
  if (o.draws) cfg.windows.n_draws = *o.draws;
  if (o.size) cfg.windows.size = *o.size;
  if (o.step) cfg.windows.step = *o.step;
  if (o.horizon) cfg.windows.horizon = *o.horizon;
  cfg.ram.validate();

  const Setup setup(cfg);
  const fs::path data = data_file(o.data);
  const Dataset d = read_dataset(data, setup);

  auto plans = make_plans(d.sample_count(), cfg.windows.size, cfg.windows.step, cfg.windows.horizon);
  if (o.first_window >= plans.size())
    throw std::invalid_argument("--first-window " + std::to_string(o.first_window) + " but only " +
                                std::to_string(plans.size()) + " windows exist");
  plans.erase(plans.begin(), plans.begin() + static_cast<std::ptrdiff_t>(o.first_window));
  if (o.max_windows && *o.max_windows < plans.size()) plans.resize(*o.max_windows);

  const auto results = run_moving_window(d, setup.priors, plans, setup.model, setup.inference());

  const fs::path dir = prepare_dir(o.out, "infer");
  write_windows_csv(dir / "windows.csv", results, setup);
  write_tracks_csv(dir / "tracks.csv", results, setup);
  for (std::size_t k = 0; k < results.size(); ++k)
    if (!results[k].failed) write_predictive_csv(dir / ("predictive_" + std::to_string(k) + ".csv"), results[k], setup.network);
  save_results(dir / "results.json", results);
  {
    std::ofstream cj(dir / "config.json", std::ios::binary);
    cj << to_json(cfg).dump(2) << '\n';
  }
  copy_input(data, dir / "data.csv");

  cli::RunManifest m;
  m.command = "infer";
  m.seed = cfg.ram.seed;
  m.input_hashes["config"] = cli::sha256_file(o.config);
  m.input_hashes["data"] = cli::sha256_file(data);
  m.settings = {{"iterations", cfg.ram.iterations}, {"burn_in", cfg.ram.burn_in},
                {"window_size", cfg.windows.size},  {"step", cfg.windows.step},
                {"horizon", cfg.windows.horizon},   {"n_draws", cfg.windows.n_draws},
                {"first_window", o.first_window},   {"windows", results.size()}};
  cli::write_manifest(dir, m);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.failed ? 1 : 0;
  if (failed) spdlog::warn("{} of {} windows failed", failed, results.size());
  return kOk;
}

// ---- forecast --------------------------------------------------------------

struct ForecastOpts {
  std::string results, out, data;
  std::optional<std::size_t> horizon;
  bool include_truncated = false;
};

int run_forecast(const ForecastOpts& o) {
  const fs::path rdir(o.results);
  const ProjectConfig cfg = load_config(rdir / "config.json");
  const Setup setup(cfg);
  const fs::path data = o.data.empty() ? rdir / "data.csv" : data_file(o.data);
  const Dataset d = read_dataset(data, setup);
  const auto results = load_results(rdir / "results.json", setup.layout.dim());
  const std::size_t horizon = o.horizon.value_or(cfg.forecast.horizon);
  const auto rows = forecast_eval(results, d, setup.model, setup.layout, horizon,
                                  o.include_truncated || cfg.forecast.include_truncated);
  const fs::path dir = o.out.empty() ? rdir : prepare_dir(o.out, "forecast");
  fs::create_directories(dir);
  write_forecast_csv(dir / "forecast_eval.csv", rows);

  cli::RunManifest m;
  m.command = "forecast";
  m.seed = cfg.ram.seed;
  m.input_hashes["results"] = cli::sha256_file(rdir / "results.json");
  m.input_hashes["config"] = cli::sha256_file(rdir / "config.json");
  m.input_hashes["data"] = cli::sha256_file(data);
  m.settings = {{"horizon", horizon}, {"rows", rows.size()}};
  // Next to the infer outputs the infer manifest stays in place.
  cli::write_manifest(dir, m, o.out.empty() ? "forecast_manifest.json" : "run_manifest.json");
  spdlog::info("{} of {} windows evaluable over {} samples", rows.size(), results.size(), horizon);
  return kOk;
}

// ---- sweep -----------------------------------------------------------------

struct SweepOpts {
  std::string config, out;
  std::vector<std::size_t> sizes;
  std::vector<std::string> pairs;
  std::optional<std::uint64_t> iterations, burn_in, seed;
};

int run_sweep(const SweepOpts& o) {
  ProjectConfig cfg = load_config(o.config);
  if (o.iterations) cfg.ram.iterations = *o.iterations;
  if (o.burn_in) cfg.ram.burn_in = *o.burn_in;
  if (o.seed) cfg.ram.seed = *o.seed;
  cfg.ram.validate();
  if (!o.sizes.empty()) cfg.sweep.window_sizes = o.sizes;
  if (!o.pairs.empty()) {
    cfg.sweep.noise_pairs.clear();
    for (const auto& p : o.pairs) {
      const auto colon = p.find(':');
      try {
        cfg.sweep.noise_pairs.emplace_back(std::stod(p.substr(0, colon)), std::stod(p.substr(colon + 1)));
      } catch (const std::exception&) {
        throw CLI::ValidationError("--pairs", "expected sigma_co2:sigma_temp, got '" + p + "'");
      }
    }
  }
  const Setup setup(cfg);
  const auto cells = sweep(setup, cfg.sweep, setup.inference());
  const fs::path dir = prepare_dir(o.out, "sweep");
  write_sweep_csv(dir / "sweep.csv", cells);

  cli::RunManifest m;
  m.command = "sweep";
  m.seed = cfg.ram.seed;
  m.input_hashes["config"] = cli::sha256_file(o.config);
  m.settings = {{"iterations", cfg.ram.iterations}, {"burn_in", cfg.ram.burn_in}, {"cells", cells.size()}};
  cli::write_manifest(dir, m);
  return kOk;
}

// ---- calibrate -------------------------------------------------------------

struct CalibrateOpts {
  std::string data, out, baseline, extract, config;
  bool rooms_only = false;
};

// Zone ids from co2_<id> columns that have a matching temp_<id> column.
std::vector<std::string> zones_from_header(const fs::path& path) {
  const CsvTable t = read_csv(path);
  std::vector<std::string> zones;
  for (const auto& h : t.header)
    if (h.rfind("co2_", 0) == 0 && t.column("temp_" + h.substr(4)) != CsvTable::npos) zones.push_back(h.substr(4));
  if (zones.empty()) throw DataError(path.string(), 1, "", "no co2_<zone>/temp_<zone> column pairs found");
  return zones;
}

int run_calibrate(const CalibrateOpts& o) {
  SensorSchema schema;
  std::vector<std::string> zones;
  std::vector<bool> participating;
  std::optional<ProjectConfig> cfg;
  if (!o.config.empty()) {
    cfg = load_config(o.config);
    schema = cfg->sensors;
    const ZoneNetwork net = build_network(cfg->network);
    zones = zone_ids(net);
    const bool with_boundary = cfg->calibration.include_boundary && !o.rooms_only;
    for (std::size_t z = 0; z < zones.size(); ++z) participating.push_back(with_boundary || !net.is_boundary(z));
  } else {
    zones = zones_from_header(o.data);
    participating.assign(zones.size(), true);
  }

  std::optional<std::pair<double, double>> baseline, extract;
  if (!o.baseline.empty()) baseline = parse_interval(o.baseline, "--baseline");
  else if (cfg) baseline = cfg->calibration.baseline;
  if (!o.extract.empty()) extract = parse_interval(o.extract, "--extract");
  else if (cfg) extract = cfg->calibration.extract;
  if (!baseline) throw CLI::ValidationError("--baseline", "no baseline given on the command line or in the config");

  const RawSensorTable raw = load_sensor_csv(o.data, schema, zones);
  CalibrationResult cal = offset_calibrate(raw, baseline->first, baseline->second, participating);
  const fs::path dir = prepare_dir(o.out, "calibrate");
  write_offsets_csv(dir / "offsets.csv", cal);
  const RawSensorTable out = extract ? extract_interval(cal.table, extract->first, extract->second) : cal.table;
  write_sensor_csv(dir / "calibrated.csv", out, schema);

  cli::RunManifest m;
  m.command = "calibrate";
  m.input_hashes["data"] = cli::sha256_file(o.data);
  if (!o.config.empty()) m.input_hashes["config"] = cli::sha256_file(o.config);
  m.settings = {{"baseline", {baseline->first, baseline->second}}, {"samples", out.times.size()}};
  if (extract) m.settings["extract"] = {extract->first, extract->second};
  cli::write_manifest(dir, m);
  return kOk;
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateOpts {
  std::string pred, truth, config, interval;
};

int run_evaluate(const EvaluateOpts& o) {
  const CsvTable p = read_csv(o.pred);
  const CsvTable t = read_csv(o.truth);
  if (p.rows.size() != t.rows.size())
    throw DataError(o.pred, 0, "", "has " + std::to_string(p.rows.size()) + " rows, truth has " +
                                       std::to_string(t.rows.size()));

  SensorSchema schema;
  std::vector<std::string> co2_cols, temp_cols;
  if (!o.config.empty()) {
    const ProjectConfig cfg = load_config(o.config);
    schema = cfg.sensors;
    const ZoneNetwork net = build_network(cfg.network);
    for (const std::size_t z : net.interior_zones()) {
      co2_cols.push_back(schema.co2_column(net.zones()[z].id));
      temp_cols.push_back(schema.temp_column(net.zones()[z].id));
    }
  } else {
    for (const auto& h : p.header) {
      if (h.rfind("co2", 0) == 0) co2_cols.push_back(h);
      if (h.rfind("temp", 0) == 0) temp_cols.push_back(h);
    }
  }
  std::optional<std::pair<double, double>> window;
  if (!o.interval.empty()) window = parse_interval(o.interval, "--interval");

  auto matrix = [&](const CsvTable& tab, const std::string& file, const std::vector<std::string>& cols) {
    const std::size_t tc = tab.column(schema.time_column);
    if (tc == CsvTable::npos) throw DataError(file, 1, schema.time_column, "required column is missing");
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < tab.rows.size(); ++i) {
      const double time = std::stod(tab.rows[i][tc]);
      if (!window || (time >= window->first && time <= window->second)) rows.push_back(i);
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(cols.size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::size_t k = tab.column(cols[c]);
      if (k == CsvTable::npos) throw DataError(file, 1, cols[c], "required column is missing");
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string& cell = tab.rows[rows[r]][k];
        try {
          std::size_t used = 0;
          m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = std::stod(cell, &used);
          if (used != cell.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
          throw DataError(file, tab.lines[rows[r]], cols[c], "cannot parse '" + cell + "' as a number");
        }
      }
    }
    return m;
  };

  std::cout << std::left << std::setw(8) << "field" << std::setw(16) << "rmse" << "nrmse\n";
  for (const auto& [name, cols] : {std::pair{"co2", co2_cols}, std::pair{"temp", temp_cols}}) {
    if (cols.empty()) continue;
    const Eigen::MatrixXd pm = matrix(p, o.pred, cols);
    const Eigen::MatrixXd tm = matrix(t, o.truth, cols);
    std::ostringstream r, n;
    r << std::fixed << std::setprecision(6) << rmse(pm, tm);
    n << std::fixed << std::setprecision(4) << nrmse(pm, tm) << '%';
    std::cout << std::left << std::setw(8) << name << std::setw(16) << r.str() << n.str() << '\n';
  }
  return kOk;
}

int fail(ExitCode code, const std::string& kind, const std::string& message, const std::string& extra = "") {
  std::string flat = message;
  for (char& c : flat)
    if (c == '\n') c = ' ';
  std::cerr << "zonenet: error kind=" << kind << extra << " message=" << quoted(flat) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zonenet: zone-network CO2/temperature simulation and moving-window inference"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  SimulateOpts sim;
  auto* s = app.add_subcommand("simulate", "generate a synthetic dataset from the config's ground truth");
  s->add_option("--config", sim.config, "config file")->required()->check(CLI::ExistingFile);
  s->add_option("--out", sim.out, "output directory (default $ZONENET_OUT_DIR/simulate)");
  s->add_option("--seed", sim.seed, "noise seed");
  s->add_option("--sigma-co2", sim.sigma_co2, "CO2 noise sd, ppm");
  s->add_option("--sigma-temp", sim.sigma_temp, "temperature noise sd, degC");

  InferOpts inf;
  auto* i = app.add_subcommand("infer", "moving-window inference on a dataset");
  i->add_option("--data", inf.data, "dataset CSV, or a directory holding observed.csv")->required()->check(CLI::ExistingPath);
  i->add_option("--config", inf.config, "config file")->required()->check(CLI::ExistingFile);
  i->add_option("--out", inf.out, "output directory (default $ZONENET_OUT_DIR/infer)");
  i->add_option("--seed", inf.seed, "base sampler seed; window k uses seed + k");
  i->add_option("--iterations", inf.iterations, "chain length per window");
  i->add_option("--burn-in", inf.burn_in, "discarded iterations per window");
  i->add_option("--draws", inf.draws, "posterior draws for the predictive bands");
  i->add_option("--window-size", inf.size, "window length, samples");
  i->add_option("--step", inf.step, "window step, samples");
  i->add_option("--horizon", inf.horizon, "forecast horizon of the predictive output, samples");
  i->add_option("--first-window", inf.first_window, "skip windows before this index");
  i->add_option("--max-windows", inf.max_windows, "run at most this many windows");
  i->add_flag("--full-scale", inf.full_scale, "100000 iterations with 50000 burn-in");

  ForecastOpts fc;
  auto* f = app.add_subcommand("forecast", "score posterior-mean forecasts after each window");
  f->add_option("--results", fc.results, "directory written by infer")->required()->check(CLI::ExistingDirectory);
  f->add_option("--horizon", fc.horizon, "samples after each window end");
  f->add_option("--data", fc.data, "observations to score against (default: the data infer used)");
  f->add_option("--out", fc.out, "output directory (default: the results directory)");
  f->add_flag("--include-truncated", fc.include_truncated, "also score windows with a short horizon");

  SweepOpts sw;
  auto* w = app.add_subcommand("sweep", "window-size x noise-level forecast sweep");
  w->add_option("--config", sw.config, "config file")->required()->check(CLI::ExistingFile);
  w->add_option("--out", sw.out, "output directory (default $ZONENET_OUT_DIR/sweep)");
  w->add_option("--sizes", sw.sizes, "window sizes, samples")->delimiter(',');
  w->add_option("--pairs", sw.pairs, "noise pairs sigma_co2:sigma_temp")->delimiter(',');
  w->add_option("--iterations", sw.iterations, "chain length per window");
  w->add_option("--burn-in", sw.burn_in, "discarded iterations per window");
  w->add_option("--seed", sw.seed, "base sampler seed");

  CalibrateOpts cal;
  auto* c = app.add_subcommand("calibrate", "remove per-sensor offsets against a shared baseline");
  c->add_option("--data", cal.data, "sensor CSV")->required()->check(CLI::ExistingFile);
  c->add_option("--baseline", cal.baseline, "baseline interval t0:t1, s");
  c->add_option("--extract", cal.extract, "keep only t0:t1 (s) and re-base time to its start");
  c->add_option("--config", cal.config, "config with the sensor schema and zone list");
  c->add_option("--out", cal.out, "output directory (default $ZONENET_OUT_DIR/calibrate)");
  c->add_flag("--rooms-only", cal.rooms_only, "leave ambient sensors out of the calibration");

  EvaluateOpts ev;
  auto* e = app.add_subcommand("evaluate", "RMSE and nRMSE of a prediction CSV against a truth CSV");
  e->add_option("--pred", ev.pred, "prediction CSV")->required()->check(CLI::ExistingFile);
  e->add_option("--truth", ev.truth, "truth CSV")->required()->check(CLI::ExistingFile);
  e->add_option("--config", ev.config, "restrict to the config's interior zones");
  e->add_option("--interval", ev.interval, "only rows with t0 <= time <= t1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    return fail(kUsage, "usage", err.what());
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("zonenet"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*s) return run_simulate(sim);
    if (*i) return run_infer(inf);
    if (*f) return run_forecast(fc);
    if (*w) return run_sweep(sw);
    if (*c) return run_calibrate(cal);
    if (*e) return run_evaluate(ev);
  } catch (const DataError& err) {
    std::string extra = " file=" + quoted(err.file());
    if (err.row()) extra += " row=" + std::to_string(err.row());
    if (!err.column().empty()) extra += " column=" + quoted(err.column());
    return fail(kData, "data", err.what(), extra);
  } catch (const ConfigError& err) {
    return fail(kConfig, "config", err.what(), " where=" + quoted(err.where()));
  } catch (const CLI::ValidationError& err) {
    return fail(kUsage, "usage", err.what());
  } catch (const std::exception& err) {
    return fail(kRuntime, "runtime", err.what());
  }
  return kUsage;
}

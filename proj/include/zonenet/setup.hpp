#pragma once

#include <Eigen/Core>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zonenet/forward.hpp"
#include "zonenet/moving_window.hpp"
#include "zonenet/network.hpp"
#include "zonenet/posterior.hpp"
#include "zonenet/ram.hpp"

namespace zonenet {

struct NoiseSpec {
  double sigma_co2 = 5.0;   // ppm
  double sigma_temp = 0.1;  // degC
  std::uint64_t seed = 1;
};

// Ground truth keyed by zone / edge id, as written in config. Zones missing
// from a schedule entry are unoccupied during that piece.
struct TruthSpec {
  std::vector<std::pair<double, std::map<std::string, double>>> schedule;
  std::map<std::string, double> independent_flows;
  std::map<std::string, double> resistances;
  std::map<std::string, double> capacitances;
  double co2_initial = 400.0;
  double temp_initial = 20.0;
};

struct AmbientSpec {
  double co2 = 400.0;
  double temp = 20.0;
};

struct GenerationSettings {
  double duration = 14400.0;  // s
  double sample_dt = 60.0;    // s
  NoiseSpec noise;
};

// Default initial vector, one scalar per block. Blocks left empty start at
// their prior means.
struct InitialGuess {
  std::optional<double> occupancy, flows;
  std::optional<double> co2_initial = 400.0, temp_initial = 20.0;
  std::optional<double> resistances, capacitances, sigma_co2, sigma_temp;
};

struct WindowSettings {
  std::size_t size = 40;
  std::size_t step = 10;
  std::size_t horizon = 40;
  std::size_t n_draws = 500;
  std::size_t max_stored_samples = 1000;
  double scale_floor_fraction = 1e-3;
};

struct SweepSettings {
  std::vector<std::size_t> window_sizes;
  std::vector<std::pair<double, double>> noise_pairs;
  double eval_start = 4800.0;  // s; the predicting window ends here
  double eval_end = 7200.0;
  std::size_t lead_windows = 0;  // warm-up windows before the predicting one
  std::size_t lead_step = 10;
};

struct ForecastSettings {
  std::size_t horizon = 80;
  bool include_truncated = false;
};

// Sensor CSV layout. Column names default to co2_<zone> / temp_<zone>.
struct SensorSchema {
  std::string time_column = "time";
  std::map<std::string, std::string> co2_columns;
  std::map<std::string, std::string> temp_columns;

  std::string co2_column(const std::string& zone) const;
  std::string temp_column(const std::string& zone) const;
};

struct CalibrationSettings {
  std::optional<std::pair<double, double>> baseline;  // s, inclusive
  std::optional<std::pair<double, double>> extract;   // inference interval, s
  bool include_boundary = true;  // calibrate ambient sensors with the rooms
};

struct ProjectConfig {
  int schema_version = 1;
  std::string name;
  NetworkConfig network;
  Knowns knowns;
  double substep = 10.0;
  AmbientSpec ambient;
  std::optional<TruthSpec> truth;
  GenerationSettings generation;
  PriorConfig priors;
  InitialGuess initial_guess;
  RamConfig ram;
  WindowSettings windows;
  SweepSettings sweep;
  ForecastSettings forecast;
  SensorSchema sensors;
  CalibrationSettings calibration;
};

// Truth resolved against a network: vectors in interior / cotree / thermal
// edge order.
struct GroundTruth {
  OccupancySchedule schedule;
  Eigen::VectorXd independent_flows;
  Eigen::VectorXd resistances;
  Eigen::VectorXd capacitances;
  Eigen::VectorXd co2_0;
  Eigen::VectorXd temp_0;
  AmbientSpec ambient;

  // Occupancy is zero here; the schedule drives it during simulation.
  PhysicalParams params() const;
};

GroundTruth resolve_truth(const TruthSpec& spec, const AmbientSpec& ambient,
                          const ZoneNetwork& network, const TreeCotree& decomp);

// Everything a run needs, built once from a config.
struct Setup {
  explicit Setup(ProjectConfig cfg);

  ProjectConfig config;
  ZoneNetwork network;
  TreeCotree decomp;
  ForwardModel model;
  PriorSet priors;
  ParameterLayout layout;
  std::optional<GroundTruth> truth;
  Eigen::VectorXd default_theta0;

  InferenceSettings inference() const;
};

Eigen::VectorXd default_initial_vector(const InitialGuess& guess, const PriorSet& priors);

}  // namespace zonenet

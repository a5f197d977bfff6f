#pragma once

#include <filesystem>
#include <vector>

#include "zonenet/benchmark.hpp"
#include "zonenet/calibration.hpp"
#include "zonenet/moving_window.hpp"
#include "zonenet/setup.hpp"

namespace zonenet {

// windows.csv: one row per window with summary columns and the posterior
// mean of every coordinate.
void write_windows_csv(const std::filesystem::path& path, const std::vector<WindowResult>& results,
                       const Setup& setup);

// tracks.csv: long format, one row per (window, coordinate) with mean and
// 2.5/97.5% quantiles.
void write_tracks_csv(const std::filesystem::path& path, const std::vector<WindowResult>& results,
                      const Setup& setup);

// predictive_<k>.csv: absolute time, then mean/lower/upper per zone for CO2
// and temperature.
void write_predictive_csv(const std::filesystem::path& path, const WindowResult& result,
                          const ZoneNetwork& network);

// Posterior means and plans, enough for forecast_eval to run later.
void save_results(const std::filesystem::path& path, const std::vector<WindowResult>& results);
std::vector<WindowResult> load_results(const std::filesystem::path& path, Eigen::Index dim);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepCell>& cells);
void write_forecast_csv(const std::filesystem::path& path, const std::vector<ForecastRow>& rows);
void write_offsets_csv(const std::filesystem::path& path, const CalibrationResult& result);

}  // namespace zonenet

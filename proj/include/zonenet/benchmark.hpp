#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

#include "zonenet/dataset.hpp"
#include "zonenet/moving_window.hpp"
#include "zonenet/setup.hpp"

namespace zonenet {

class BenchmarkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Samples at 0, dt, ..., duration. Boundary rows carry the constant ambient
// and receive no noise; interior rows get independent Gaussian noise per
// field, CO2 and temperature drawn from separate streams of `noise.seed`.
Dataset generate_synthetic(const ForwardModel& model, const GroundTruth& truth, double duration,
                           double sample_dt, const NoiseSpec& noise);

// sqrt of the mean squared difference over all entries.
double rmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& data);
// 100 * rmse / mean|pred|, in percent.
double nrmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& data);

struct SweepCell {
  std::size_t window_size = 0;
  double sigma_co2 = 0.0;
  double sigma_temp = 0.0;
  double nrmse_co2 = 0.0;
  double nrmse_temp = 0.0;
  double acceptance = 0.0;
};

// One cell: fresh noisy data for the pair, windows ending at eval_start (plus
// optional lead windows), then the last window's posterior-mean forecast
// over [eval_start, eval_end] against the noiseless truth.
SweepCell sweep_cell(const Setup& setup, std::size_t window_size, std::pair<double, double> noise,
                     std::uint64_t noise_seed, const SweepSettings& sweep,
                     const InferenceSettings& inference);

// Cells in (pair, size) order. The data seed is generation.noise.seed + pair
// index, so every size sees the same realisation of a given pair.
std::vector<SweepCell> sweep(const Setup& setup, const SweepSettings& sweep,
                             const InferenceSettings& inference);

struct ForecastRow {
  std::size_t window_index = 0;
  double window_end_time = 0.0;  // absolute, s
  std::size_t horizon_used = 0;
  bool truncated = false;
  double nrmse_co2 = 0.0;   // mean over interior zones, percent
  double nrmse_temp = 0.0;
};

// Forecast over `horizon` samples after each window end from the window's
// posterior mean, scored against the dataset observations. Windows short of
// a full horizon are flagged truncated and dropped unless include_truncated.
std::vector<ForecastRow> forecast_eval(const std::vector<WindowResult>& results, const Dataset& dataset,
                                       const ForwardModel& model, const ParameterLayout& layout,
                                       std::size_t horizon, bool include_truncated = false);

// Nearest sample index to t; throws when t lies outside the time axis.
std::size_t index_at(const std::vector<double>& times, double t);

}  // namespace zonenet

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "zonenet/dataset.hpp"
#include "zonenet/forward.hpp"
#include "zonenet/posterior.hpp"
#include "zonenet/ram.hpp"

namespace zonenet {

class WindowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WindowPlan {
  std::size_t window_size = 40;  // samples
  std::size_t step = 1;
  std::size_t start_index = 0;
  std::size_t forecast_horizon = 0;  // samples after the window end

  std::size_t end_index() const { return start_index + window_size - 1; }
};

// Windows of `size` samples every `step` samples, starting at `first_start`,
// for as long as they fit in `sample_count`.
std::vector<WindowPlan> make_plans(std::size_t sample_count, std::size_t size, std::size_t step,
                                   std::size_t horizon, std::size_t first_start = 0);

WindowData slice_window(const Dataset& dataset, const ZoneNetwork& network, const WindowPlan& plan);

// Posterior predictive over window + horizon. Matrices are zones x times;
// `times` are relative to the window start.
struct Predictive {
  std::vector<double> times;
  Eigen::MatrixXd co2_mean, co2_lower, co2_upper;
  Eigen::MatrixXd temp_mean, temp_lower, temp_upper;
  // Points where the raw percentile band missed the mean curve and was
  // widened to contain it.
  std::size_t widened_points = 0;
  std::size_t draws = 0;
};

struct InferenceSettings {
  RamConfig ram;
  Eigen::VectorXd default_theta0;  // flat; used for the first window and after failures
  double scale_floor_fraction = 1e-3;  // proposal floor = fraction x prior sd
  std::size_t n_draws = 500;
  std::size_t max_stored_samples = 1000;
  std::size_t horizon = 0;
  bool predictive = true;
};

struct WindowResult {
  WindowPlan plan;
  double start_time = 0.0;  // absolute times of the first and last window samples
  double end_time = 0.0;
  Eigen::VectorXd theta0;
  Eigen::VectorXd posterior_mean;
  Eigen::VectorXd lower_q;  // 2.5% per coordinate
  Eigen::VectorXd upper_q;  // 97.5% per coordinate
  Eigen::MatrixXd samples;  // thinned retained draws
  double acceptance_rate = 0.0;
  double log_post_at_mean = 0.0;
  Predictive predictive;
  bool failed = false;
  bool reinitialized = false;

  ParameterVector mean_blocks(const ParameterLayout& layout) const {
    return ParameterVector::unflatten(layout, posterior_mean);
  }
};

// Per-coordinate proposal floors: fraction x prior sd (the nominal sd for
// anchored entries).
Eigen::VectorXd scale_floor(const PriorSet& priors, double fraction);

// `priors` are unanchored; anchoring to the window happens here.
WindowResult infer_window(const WindowData& window, const PriorSet& priors,
                          const Eigen::VectorXd& theta0, const ForwardModel& model,
                          const InferenceSettings& settings);

// Previous posterior mean with the initial-state blocks moved to the next
// window's first observations. Without a predecessor: `defaults`.
Eigen::VectorXd warm_start(const WindowResult* previous, const Eigen::VectorXd& defaults,
                           const ZoneNetwork& network, const ParameterLayout& layout,
                           const WindowData& next);

// Mean curve: noiseless run at `posterior_mean`. Bands: 2.5/97.5 percentiles
// over `n_draws` evenly thinned draws, each run forward and perturbed by its
// own Gaussian observation noise.
Predictive posterior_predictive(const Eigen::MatrixXd& samples, const Eigen::VectorXd& posterior_mean,
                                const WindowData& window, std::size_t horizon,
                                const ForwardModel& model, const ParameterLayout& layout,
                                std::size_t n_draws, Rng& rng);

// Runs windows in order, warm-starting each from its predecessor. Window k
// uses seed settings.ram.seed + k. A window that fails is retried from the
// defaults; if that fails too it is reported with failed = true.
std::vector<WindowResult> run_moving_window(const Dataset& dataset, const PriorSet& priors,
                                            const std::vector<WindowPlan>& plans,
                                            const ForwardModel& model,
                                            const InferenceSettings& settings);

}  // namespace zonenet

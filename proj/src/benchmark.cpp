#include "zonenet/benchmark.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace zonenet {

Dataset generate_synthetic(const ForwardModel& model, const GroundTruth& truth, double duration,
                           double sample_dt, const NoiseSpec& noise) {
  if (!(sample_dt > 0.0) || !(duration > 0.0))
    throw BenchmarkError("duration and sample interval must be positive");
  if (noise.sigma_co2 < 0.0 || noise.sigma_temp < 0.0)
    throw BenchmarkError("noise levels must be non-negative");
  const auto& network = model.network();
  const auto n = static_cast<std::size_t>(std::llround(duration / sample_dt)) + 1;

  Dataset d;
  d.times.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.times[i] = static_cast<double>(i) * sample_dt;

  const auto boundary =
      BoundarySeries::constant(network.boundary_zones().size(), truth.ambient.co2, truth.ambient.temp);
  const Trajectory tr =
      model.simulate(truth.params(), truth.co2_0, truth.temp_0, boundary, d.times, &truth.schedule);

  d.noiseless_co2 = tr.co2;
  d.noiseless_temp = tr.temp;
  d.co2 = tr.co2;
  d.temp = tr.temp;

  const Rng root(noise.seed);
  Rng rc = root.split(0);
  Rng rt = root.split(1);
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::size_t z : network.interior_zones()) {
      d.co2(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(i)) += noise.sigma_co2 * rc.normal();
      d.temp(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(i)) += noise.sigma_temp * rt.normal();
    }
  }
  return d;
}

double rmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& data) {
  if (pred.rows() != data.rows() || pred.cols() != data.cols())
    throw BenchmarkError("rmse: shapes differ (" + std::to_string(pred.rows()) + "x" +
                         std::to_string(pred.cols()) + " vs " + std::to_string(data.rows()) + "x" +
                         std::to_string(data.cols()) + ")");
  if (pred.size() == 0) throw BenchmarkError("rmse: empty input");
  return std::sqrt((pred - data).squaredNorm() / static_cast<double>(pred.size()));
}

double nrmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& data) {
  const double e = rmse(pred, data);
  const double scale = pred.cwiseAbs().mean();
  if (!(scale > 0.0)) throw BenchmarkError("nrmse: prediction has zero mean magnitude");
  return 100.0 * e / scale;
}

std::size_t index_at(const std::vector<double>& times, double t) {
  if (times.empty()) throw BenchmarkError("empty time axis");
  const double tol = 1e-6 * std::max(1.0, std::abs(times.back()));
  if (t < times.front() - tol || t > times.back() + tol)
    throw BenchmarkError("time " + std::to_string(t) + " s lies outside the data");
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  std::size_t i = static_cast<std::size_t>(it - times.begin());
  if (i == times.size() || (i > 0 && t - times[i - 1] < times[i] - t)) --i;
  return i;
}

SweepCell sweep_cell(const Setup& setup, std::size_t window_size, std::pair<double, double> noise,
                     std::uint64_t noise_seed, const SweepSettings& sweep,
                     const InferenceSettings& inference) {
  if (!setup.truth) throw BenchmarkError("sweep needs a ground truth in the config");
  const auto& gen = setup.config.generation;
  const Dataset data = generate_synthetic(setup.model, *setup.truth, gen.duration, gen.sample_dt,
                                          {noise.first, noise.second, noise_seed});
  const std::size_t e = index_at(data.times, sweep.eval_start);
  const std::size_t b = index_at(data.times, sweep.eval_end);
  if (b <= e) throw BenchmarkError("sweep evaluation interval is empty");
  if (window_size > e + 1)
    throw BenchmarkError("window of " + std::to_string(window_size) + " samples does not fit before " +
                         std::to_string(sweep.eval_start) + " s");

  const std::size_t last_start = e + 1 - window_size;
  std::vector<WindowPlan> plans;
  for (std::size_t j = sweep.lead_windows; j > 0; --j) {
    if (j * sweep.lead_step > last_start) continue;
    plans.push_back({window_size, sweep.lead_step, last_start - j * sweep.lead_step, 0});
  }
  plans.push_back({window_size, sweep.lead_step, last_start, b - e});

  InferenceSettings s = inference;
  s.n_draws = 0;  // the mean curve is all that is scored
  const auto results = run_moving_window(data, setup.priors, plans, setup.model, s);
  const WindowResult& last = results.back();
  if (last.failed) throw BenchmarkError("predicting window failed");

  const auto first_col = static_cast<Eigen::Index>(window_size - 1);
  const auto cols = static_cast<Eigen::Index>(b - e + 1);
  const auto& net = setup.network;
  const Eigen::MatrixXd pc = interior_rows(net, last.predictive.co2_mean).middleCols(first_col, cols);
  const Eigen::MatrixXd pt = interior_rows(net, last.predictive.temp_mean).middleCols(first_col, cols);
  const Eigen::MatrixXd tc =
      interior_rows(net, *data.noiseless_co2).middleCols(static_cast<Eigen::Index>(e), cols);
  const Eigen::MatrixXd tt =
      interior_rows(net, *data.noiseless_temp).middleCols(static_cast<Eigen::Index>(e), cols);

  SweepCell cell;
  cell.window_size = window_size;
  cell.sigma_co2 = noise.first;
  cell.sigma_temp = noise.second;
  cell.nrmse_co2 = nrmse(pc, tc);
  cell.nrmse_temp = nrmse(pt, tt);
  cell.acceptance = last.acceptance_rate;
  return cell;
}

std::vector<SweepCell> sweep(const Setup& setup, const SweepSettings& sweep,
                             const InferenceSettings& inference) {
  std::vector<SweepCell> cells;
  for (std::size_t p = 0; p < sweep.noise_pairs.size(); ++p) {
    for (const std::size_t size : sweep.window_sizes) {
      cells.push_back(sweep_cell(setup, size, sweep.noise_pairs[p],
                                 setup.config.generation.noise.seed + p, sweep, inference));
      const auto& c = cells.back();
      spdlog::info("sweep size {} noise ({}, {}): nRMSE CO2 {:.3f}% T {:.3f}%", size, c.sigma_co2,
                   c.sigma_temp, c.nrmse_co2, c.nrmse_temp);
    }
  }
  return cells;
}

std::vector<ForecastRow> forecast_eval(const std::vector<WindowResult>& results, const Dataset& dataset,
                                       const ForwardModel& model, const ParameterLayout& layout,
                                       std::size_t horizon, bool include_truncated) {
  if (horizon == 0) throw BenchmarkError("forecast horizon must be at least one sample");
  const auto& net = model.network();
  const std::size_t n = dataset.sample_count();
  std::vector<ForecastRow> rows;

  for (std::size_t k = 0; k < results.size(); ++k) {
    const WindowResult& r = results[k];
    if (r.failed) continue;
    const std::size_t end = r.plan.end_index();
    const std::size_t available = end + 1 < n ? n - 1 - end : 0;
    const std::size_t h = std::min(horizon, available);
    const bool truncated = h < horizon;
    if (h == 0 || (truncated && !include_truncated)) continue;

    const WindowData w = slice_window(dataset, net, r.plan);
    std::vector<double> times(dataset.times.begin() + static_cast<std::ptrdiff_t>(r.plan.start_index),
                              dataset.times.begin() + static_cast<std::ptrdiff_t>(end + h + 1));
    for (double& t : times) t -= dataset.times[r.plan.start_index];
    const ParameterVector v = r.mean_blocks(layout);
    const Trajectory tr =
        model.simulate(v.physical(), v.co2_initials, v.temp_initials, w.boundary, times);

    const auto first = static_cast<Eigen::Index>(r.plan.window_size);
    const auto cols = static_cast<Eigen::Index>(h);
    const Eigen::MatrixXd pc = interior_rows(net, tr.co2).middleCols(first, cols);
    const Eigen::MatrixXd pt = interior_rows(net, tr.temp).middleCols(first, cols);
    const Eigen::MatrixXd oc = interior_rows(net, dataset.co2).middleCols(static_cast<Eigen::Index>(end + 1), cols);
    const Eigen::MatrixXd ot = interior_rows(net, dataset.temp).middleCols(static_cast<Eigen::Index>(end + 1), cols);

    ForecastRow row;
    row.window_index = k;
    row.window_end_time = dataset.times[end];
    row.horizon_used = h;
    row.truncated = truncated;
    for (Eigen::Index z = 0; z < pc.rows(); ++z) {
      row.nrmse_co2 += nrmse(pc.row(z), oc.row(z));
      row.nrmse_temp += nrmse(pt.row(z), ot.row(z));
    }
    row.nrmse_co2 /= static_cast<double>(pc.rows());
    row.nrmse_temp /= static_cast<double>(pt.rows());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace zonenet

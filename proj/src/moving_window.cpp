#include "zonenet/moving_window.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "zonenet/stats.hpp"

namespace zonenet {

namespace {

Eigen::MatrixXd thin_rows(const Eigen::MatrixXd& m, std::size_t keep) {
  const auto rows = static_cast<std::size_t>(m.rows());
  if (keep == 0 || rows <= keep) return m;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(keep), m.cols());
  for (std::size_t k = 0; k < keep; ++k)
    out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(k * rows / keep));
  return out;
}

struct Envelope {
  Eigen::MatrixXd lower, upper;
};

// Percentile band over draws stacked as (zone, time) x draw.
Envelope envelope(const Eigen::MatrixXd& stacked, Eigen::Index zones, Eigen::Index times) {
  Envelope e{Eigen::MatrixXd(zones, times), Eigen::MatrixXd(zones, times)};
  std::vector<double> buf(static_cast<std::size_t>(stacked.cols()));
  for (Eigen::Index t = 0; t < times; ++t) {
    for (Eigen::Index z = 0; z < zones; ++z) {
      const auto r = t * zones + z;
      for (Eigen::Index d = 0; d < stacked.cols(); ++d) buf[static_cast<std::size_t>(d)] = stacked(r, d);
      e.lower(z, t) = quantile_inplace(buf, 0.025);
      e.upper(z, t) = quantile_inplace(buf, 0.975);
    }
  }
  return e;
}

std::size_t widen_to_mean(const Eigen::MatrixXd& mean, Eigen::MatrixXd& lower, Eigen::MatrixXd& upper) {
  std::size_t widened = 0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    bool hit = false;
    if (lower(i) > mean(i)) lower(i) = mean(i), hit = true;
    if (upper(i) < mean(i)) upper(i) = mean(i), hit = true;
    widened += hit ? 1 : 0;
  }
  return widened;
}

}  // namespace

std::vector<WindowPlan> make_plans(std::size_t sample_count, std::size_t size, std::size_t step,
                                   std::size_t horizon, std::size_t first_start) {
  if (size < 2) throw WindowError("window size must be at least 2 samples");
  if (step < 1) throw WindowError("window step must be at least 1 sample");
  std::vector<WindowPlan> plans;
  for (std::size_t s = first_start; s + size <= sample_count; s += step)
    plans.push_back({size, step, s, horizon});
  if (plans.empty())
    throw WindowError("dataset of " + std::to_string(sample_count) +
                      " samples is too short for a window of " + std::to_string(size));
  return plans;
}

WindowData slice_window(const Dataset& dataset, const ZoneNetwork& network, const WindowPlan& plan) {
  if (plan.window_size < 2) throw WindowError("window size must be at least 2 samples");
  const std::size_t n = dataset.sample_count();
  if (plan.start_index >= n || plan.window_size > n - plan.start_index)
    throw WindowError("window [" + std::to_string(plan.start_index) + ", " +
                      std::to_string(plan.start_index + plan.window_size) +
                      ") does not fit in a dataset of " + std::to_string(n) + " samples");
  const auto start = static_cast<Eigen::Index>(plan.start_index);
  const auto size = static_cast<Eigen::Index>(plan.window_size);
  const double origin = dataset.times[plan.start_index];

  WindowData w;
  w.times.reserve(plan.window_size);
  for (std::size_t i = 0; i < plan.window_size; ++i)
    w.times.push_back(dataset.times[plan.start_index + i] - origin);
  w.co2 = dataset.co2.middleCols(start, size);
  w.temp = dataset.temp.middleCols(start, size);
  w.boundary = dataset.boundary(network, plan.start_index, origin);
  return w;
}

Eigen::VectorXd scale_floor(const PriorSet& priors, double fraction) {
  Eigen::VectorXd floor(static_cast<Eigen::Index>(priors.specs.size()));
  for (std::size_t i = 0; i < priors.specs.size(); ++i)
    floor[static_cast<Eigen::Index>(i)] = fraction * priors.specs[i].sigma;
  return floor;
}

Eigen::VectorXd warm_start(const WindowResult* previous, const Eigen::VectorXd& defaults,
                           const ZoneNetwork& network, const ParameterLayout& layout,
                           const WindowData& next) {
  if (previous == nullptr || previous->failed) return defaults;
  Eigen::VectorXd theta = previous->posterior_mean;
  const auto& iz = network.interior_zones();
  for (std::size_t s = 0; s < iz.size(); ++s) {
    const auto k = static_cast<Eigen::Index>(s);
    const auto z = static_cast<Eigen::Index>(iz[s]);
    theta[layout.offset(Block::co2_initial) + k] = next.co2(z, 0);
    theta[layout.offset(Block::temp_initial) + k] = next.temp(z, 0);
  }
  return theta;
}

Predictive posterior_predictive(const Eigen::MatrixXd& samples, const Eigen::VectorXd& posterior_mean,
                                const WindowData& window, std::size_t horizon,
                                const ForwardModel& model, const ParameterLayout& layout,
                                std::size_t n_draws, Rng& rng) {
  const auto& network = model.network();
  const std::size_t nw = window.times.size();
  if (nw < 2) throw WindowError("predictive needs a window of at least two samples");

  Predictive p;
  p.times = window.times;
  const double dt = window.times[nw - 1] - window.times[nw - 2];
  for (std::size_t k = 1; k <= horizon; ++k)
    p.times.push_back(window.times.back() + static_cast<double>(k) * dt);
  if (p.times.back() > window.boundary.end_time())
    spdlog::warn("forecast runs {:.0f} s past the recorded ambient; holding the last value",
                 p.times.back() - window.boundary.end_time());

  auto run = [&](const Eigen::VectorXd& theta) {
    const ParameterVector v = ParameterVector::unflatten(layout, theta);
    return model.simulate(v.physical(), v.co2_initials, v.temp_initials, window.boundary, p.times);
  };

  const Trajectory mean = run(posterior_mean);
  p.co2_mean = mean.co2;
  p.temp_mean = mean.temp;

  const auto zones = p.co2_mean.rows();
  const auto times = p.co2_mean.cols();
  const std::size_t draws = std::min<std::size_t>(n_draws, static_cast<std::size_t>(samples.rows()));
  p.draws = draws;
  if (draws == 0) {
    p.co2_lower = p.co2_upper = p.co2_mean;
    p.temp_lower = p.temp_upper = p.temp_mean;
    return p;
  }

  const Eigen::MatrixXd chosen = thin_rows(samples, draws);
  Eigen::MatrixXd co2_stack(zones * times, static_cast<Eigen::Index>(draws));
  Eigen::MatrixXd temp_stack(zones * times, static_cast<Eigen::Index>(draws));
  const auto& iz = network.interior_zones();
  for (Eigen::Index d = 0; d < chosen.rows(); ++d) {
    const Eigen::VectorXd theta = chosen.row(d).transpose();
    Trajectory tr = run(theta);
    const ParameterVector v = ParameterVector::unflatten(layout, theta);
    for (Eigen::Index t = 0; t < times; ++t) {
      for (std::size_t s = 0; s < iz.size(); ++s) {
        const auto z = static_cast<Eigen::Index>(iz[s]);
        tr.co2(z, t) += v.sigma_co2[static_cast<Eigen::Index>(s)] * rng.normal();
        tr.temp(z, t) += v.sigma_temp[static_cast<Eigen::Index>(s)] * rng.normal();
      }
    }
    co2_stack.col(d) = Eigen::Map<const Eigen::VectorXd>(tr.co2.data(), tr.co2.size());
    temp_stack.col(d) = Eigen::Map<const Eigen::VectorXd>(tr.temp.data(), tr.temp.size());
  }

  Envelope ec = envelope(co2_stack, zones, times);
  Envelope et = envelope(temp_stack, zones, times);
  p.widened_points = widen_to_mean(p.co2_mean, ec.lower, ec.upper) +
                     widen_to_mean(p.temp_mean, et.lower, et.upper);
  p.co2_lower = std::move(ec.lower);
  p.co2_upper = std::move(ec.upper);
  p.temp_lower = std::move(et.lower);
  p.temp_upper = std::move(et.upper);
  return p;
}

WindowResult infer_window(const WindowData& window, const PriorSet& priors,
                          const Eigen::VectorXd& theta0, const ForwardModel& model,
                          const InferenceSettings& settings) {
  const auto& network = model.network();
  const PriorSet anchored = anchor_priors(priors, network, window);
  const LogPosterior post(model, anchored, window);

  if (theta0.size() != anchored.layout.dim())
    throw WindowError("initial vector has " + std::to_string(theta0.size()) + " entries, expected " +
                      std::to_string(anchored.layout.dim()));
  WindowResult r;
  r.theta0 = theta0;
  Eigen::VectorXd start = theta0;
  if (!std::isfinite(post(start))) {
    start = repair_into_support(start, anchored);
    if (!std::isfinite(post(start)))
      throw WindowError("log-posterior is not finite at the initial point, even after repair");
  }

  Rng rng(settings.ram.seed);
  Rng predictive_rng = rng.split(1);
  const LogDensityFn logpost = [&post](const Eigen::VectorXd& th) { return post(th); };
  const ChainOutput chain = run_chain(logpost, start, scale_floor(anchored, settings.scale_floor_fraction),
                                      settings.ram, rng);

  r.acceptance_rate = chain.acceptance_rate;
  r.posterior_mean = chain.samples.colwise().mean().transpose();
  const auto dim = chain.samples.cols();
  r.lower_q.resize(dim);
  r.upper_q.resize(dim);
  std::vector<double> col(static_cast<std::size_t>(chain.samples.rows()));
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < chain.samples.rows(); ++i) col[static_cast<std::size_t>(i)] = chain.samples(i, j);
    r.lower_q[j] = quantile_inplace(col, 0.025);
    r.upper_q[j] = quantile_inplace(col, 0.975);
  }
  r.log_post_at_mean = post(r.posterior_mean);
  if (!std::isfinite(r.log_post_at_mean))
    throw WindowError("log-posterior is not finite at the posterior mean");
  r.samples = thin_rows(chain.samples, settings.max_stored_samples);

  if (settings.predictive)
    r.predictive = posterior_predictive(r.samples, r.posterior_mean, window, settings.horizon, model,
                                        anchored.layout, settings.n_draws, predictive_rng);
  return r;
}

std::vector<WindowResult> run_moving_window(const Dataset& dataset, const PriorSet& priors,
                                            const std::vector<WindowPlan>& plans,
                                            const ForwardModel& model,
                                            const InferenceSettings& settings) {
  if (plans.empty()) throw WindowError("no windows to run");
  const auto& network = model.network();
  std::vector<WindowResult> results;
  results.reserve(plans.size());

  for (std::size_t k = 0; k < plans.size(); ++k) {
    const WindowData window = slice_window(dataset, network, plans[k]);
    InferenceSettings local = settings;
    local.horizon = plans[k].forecast_horizon;
    local.ram.seed = settings.ram.seed + k;

    const WindowResult* prev = results.empty() ? nullptr : &results.back();
    const Eigen::VectorXd theta0 =
        warm_start(prev, settings.default_theta0, network, priors.layout, window);

    WindowResult r;
    try {
      r = infer_window(window, priors, theta0, model, local);
    } catch (const std::exception& e) {
      spdlog::warn("window {} (start {}) failed: {}; restarting from defaults", k,
                   plans[k].start_index, e.what());
      try {
        r = infer_window(window, priors, settings.default_theta0, model, local);
        r.reinitialized = true;
      } catch (const std::exception& e2) {
        spdlog::error("window {} failed again: {}", k, e2.what());
        r = WindowResult{};
        r.theta0 = theta0;
        r.failed = true;
      }
    }
    r.plan = plans[k];
    r.start_time = dataset.times[plans[k].start_index];
    r.end_time = dataset.times[plans[k].end_index()];
    spdlog::info("window {}/{} start {:.0f} s acceptance {:.3f}", k + 1, plans.size(), r.start_time,
                 r.acceptance_rate);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace zonenet

#include "zonenet/ram.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <iomanip>

namespace zonenet {

void RamConfig::validate() const {
  if (iterations == 0) throw SamplerError("iterations must be positive");
  if (!(burn_in < iterations)) throw SamplerError("burn_in must be smaller than iterations");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw SamplerError("target acceptance must lie in (0, 1)");
  if (!(adapt_exponent > 0.5 && adapt_exponent <= 1.0))
    throw SamplerError("adaptation exponent must lie in (0.5, 1]");
  if (!(initial_scale >= 0.0)) throw SamplerError("initial scale must be non-negative");
  if (!(adapt_scale >= 0.0)) throw SamplerError("adaptation scale must be non-negative");
}

Proposal propose(const ChainState& state, Rng& rng) {
  const Eigen::Index d = state.theta.size();
  Proposal p;
  p.z.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) p.z[i] = rng.normal();
  p.theta = state.theta + state.factor.triangularView<Eigen::Lower>() * p.z;
  return p;
}

double accept_prob(double logp_current, double logp_proposed) {
  if (std::isnan(logp_proposed) || logp_proposed == -std::numeric_limits<double>::infinity())
    return 0.0;
  const double diff = logp_proposed - logp_current;
  return diff >= 0.0 ? 1.0 : std::exp(diff);
}

bool cholesky_rank_one(Eigen::MatrixXd& lower, Eigen::VectorXd v, double sign) {
  const Eigen::Index n = lower.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lkk = lower(k, k);
    const double r2 = lkk * lkk + sign * v[k] * v[k];
    if (!(r2 > 0.0) || !(lkk > 0.0)) return false;
    const double r = std::sqrt(r2);
    const double c = r / lkk;
    const double s = v[k] / lkk;
    lower(k, k) = r;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      lower(i, k) = (lower(i, k) + sign * s * v[i]) / c;
      v[i] = c * v[i] - s * lower(i, k);
    }
  }
  return true;
}

std::optional<Eigen::MatrixXd> ram_adapt(const Eigen::MatrixXd& factor, const Eigen::VectorXd& z,
                                         double alpha, std::size_t iteration,
                                         const RamConfig& config) {
  const double norm = z.norm();
  if (!(norm > 0.0) || iteration == 0) return factor;
  const double scale = config.adapt_scale > 0.0 ? config.adapt_scale : static_cast<double>(z.size());
  const double gamma = std::min(1.0, scale * std::pow(static_cast<double>(iteration), -config.adapt_exponent));
  const double coeff = gamma * (alpha - config.target_accept);
  if (coeff == 0.0) return factor;
  Eigen::VectorXd v = factor.triangularView<Eigen::Lower>() * (z / norm);
  v *= std::sqrt(std::abs(coeff));
  Eigen::MatrixXd updated = factor;
  if (!cholesky_rank_one(updated, std::move(v), coeff > 0.0 ? 1.0 : -1.0)) return std::nullopt;
  return updated;
}

ChainOutput run_chain(const LogDensityFn& logpost, const Eigen::VectorXd& init,
                      const Eigen::VectorXd& init_scales, const RamConfig& config, Rng& rng,
                      const TraceFn& trace) {
  const Eigen::Index d = init.size();
  if (init_scales.size() != d) throw SamplerError("init_scales must match the parameter dimension");
  Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double sd = std::max(config.initial_scale * std::abs(init[i]), init_scales[i]);
    if (!(sd > 0.0))
      throw SamplerError("initial proposal scale is zero for coordinate " + std::to_string(i));
    factor(i, i) = sd;
  }
  return run_chain_from_factor(logpost, init, factor, config, rng, trace);
}

ChainOutput run_chain_from_factor(const LogDensityFn& logpost, const Eigen::VectorXd& init,
                                  const Eigen::MatrixXd& initial_factor, const RamConfig& config, Rng& rng,
                      const TraceFn& trace) {
  config.validate();
  const Eigen::Index d = init.size();
  if (initial_factor.rows() != d || initial_factor.cols() != d)
    throw SamplerError("initial factor must be square with the parameter dimension");
  for (Eigen::Index i = 0; i < d; ++i)
    if (!(initial_factor(i, i) > 0.0))
      throw SamplerError("initial factor needs a positive diagonal (coordinate " + std::to_string(i) + ")");

  ChainState state;
  state.theta = init;
  state.log_post = logpost(init);
  if (!std::isfinite(state.log_post))
    throw SamplerError("log-posterior is not finite at the initial point");
  state.factor = initial_factor.triangularView<Eigen::Lower>();

  const std::size_t kept = config.iterations - config.burn_in;
  ChainOutput out;
  out.samples.resize(static_cast<Eigen::Index>(kept), d);
  out.log_posts.resize(static_cast<Eigen::Index>(kept));
  std::size_t accepted_kept = 0, accepted_all = 0;

  for (std::size_t it = 1; it <= config.iterations; ++it) {
    state.iteration = it;
    const Proposal p = propose(state, rng);
    const double lp = logpost(p.theta);
    const double alpha = accept_prob(state.log_post, lp);
    const bool accept = rng.uniform() < alpha;
    if (accept) {
      state.theta = p.theta;
      state.log_post = lp;
      ++accepted_all;
    }

    const bool adapting = !(config.freeze_after_burn_in && it > config.burn_in);
    if (adapting) {
      if (auto next = ram_adapt(state.factor, p.z, alpha, it, config)) {
        state.factor = std::move(*next);
      } else {
        if (out.skipped_adaptations == 0)
          spdlog::warn("proposal factor downdate lost positive definiteness at iteration {}; "
                       "adaptation skipped",
                       it);
        ++out.skipped_adaptations;
      }
    }

    if (it > config.burn_in) {
      const auto row = static_cast<Eigen::Index>(it - config.burn_in - 1);
      out.samples.row(row) = state.theta.transpose();
      out.log_posts[row] = state.log_post;
      if (accept) ++accepted_kept;
    }
    if (trace) trace({it, state.log_post, accept});
  }

  out.acceptance_rate = static_cast<double>(accepted_kept) / static_cast<double>(kept);
  out.overall_acceptance = static_cast<double>(accepted_all) / static_cast<double>(config.iterations);
  out.final_state = std::move(state);
  return out;
}

void write_trace_header(std::ostream& out) { out << "iteration,log_post,accepted\n"; }

TraceFn csv_trace(std::ostream& out) {
  return [&out](const TraceRecord& r) {
    out << r.iteration << ',' << std::setprecision(17) << r.log_post << ',' << (r.accepted ? 1 : 0)
        << '\n';
  };
}

}  // namespace zonenet

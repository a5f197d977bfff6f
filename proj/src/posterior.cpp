#include "zonenet/posterior.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace zonenet {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

Eigen::Index as_index(std::size_t n) { return static_cast<Eigen::Index>(n); }

}  // namespace

const char* block_name(Block b) {
  switch (b) {
    case Block::occupancy: return "occupancy";
    case Block::flows: return "flow";
    case Block::co2_initial: return "co2_0";
    case Block::resistance: return "R";
    case Block::capacitance: return "C";
    case Block::temp_initial: return "temp_0";
    case Block::sigma_co2: return "sigma_co2";
    case Block::sigma_temp: return "sigma_temp";
  }
  return "?";
}

ParameterLayout::ParameterLayout(std::size_t interior_zones, std::size_t independent_flows,
                                 std::size_t thermal_edges) {
  const auto z = as_index(interior_zones);
  sizes_ = {z, as_index(independent_flows), z, as_index(thermal_edges), z, z, z, z};
  Eigen::Index at = 0;
  for (std::size_t b = 0; b < sizes_.size(); ++b) {
    offsets_[b] = at;
    at += sizes_[b];
  }
  dim_ = at;
}

ParameterLayout ParameterLayout::for_network(const ZoneNetwork& network, const TreeCotree& decomp) {
  return ParameterLayout(network.interior_zones().size(), decomp.cotree_edges.size(),
                         network.thermal_edges().size());
}

Block ParameterLayout::block_of(Eigen::Index flat) const {
  for (Block b : kBlocks)
    if (flat >= offset(b) && flat < offset(b) + size(b)) return b;
  throw PriorError("flat index " + std::to_string(flat) + " outside parameter layout");
}

Eigen::VectorXd ParameterVector::flatten() const {
  const std::array<const Eigen::VectorXd*, 8> parts = {
      &occupancy,    &independent_flows, &co2_initials, &resistances,
      &capacitances, &temp_initials,     &sigma_co2,    &sigma_temp};
  Eigen::Index n = 0;
  for (const auto* p : parts) n += p->size();
  Eigen::VectorXd flat(n);
  Eigen::Index at = 0;
  for (const auto* p : parts) {
    flat.segment(at, p->size()) = *p;
    at += p->size();
  }
  return flat;
}

ParameterVector ParameterVector::unflatten(const ParameterLayout& layout,
                                           const Eigen::VectorXd& flat) {
  if (flat.size() != layout.dim())
    throw PriorError("flat vector has " + std::to_string(flat.size()) + " entries, layout expects " +
                     std::to_string(layout.dim()));
  auto seg = [&](Block b) -> Eigen::VectorXd { return flat.segment(layout.offset(b), layout.size(b)); };
  return {seg(Block::occupancy),    seg(Block::flows),        seg(Block::co2_initial),
          seg(Block::resistance),   seg(Block::capacitance),  seg(Block::temp_initial),
          seg(Block::sigma_co2),    seg(Block::sigma_temp)};
}

PhysicalParams ParameterVector::physical() const {
  return {occupancy, independent_flows, resistances, capacitances};
}

std::vector<std::string> coordinate_names(const ZoneNetwork& network, const TreeCotree& decomp) {
  std::vector<std::string> names;
  auto per_zone = [&](const char* prefix) {
    for (std::size_t z : network.interior_zones())
      names.push_back(std::string(prefix) + "[" + network.zones()[z].id + "]");
  };
  per_zone("occupancy");
  for (std::size_t e : decomp.cotree_edges) names.push_back("flow[" + network.flow_edges()[e].id + "]");
  per_zone("co2_0");
  for (const auto& e : network.thermal_edges()) names.push_back("R[" + e.id + "]");
  per_zone("C");
  per_zone("temp_0");
  per_zone("sigma_co2");
  per_zone("sigma_temp");
  return names;
}

PriorSpec PriorSpec::normal(double mu, double sigma) {
  PriorSpec s;
  s.family = PriorFamily::normal;
  s.mu = mu;
  s.sigma = sigma;
  return s;
}

PriorSpec PriorSpec::truncated(double mu, double sigma, double lower, double upper) {
  PriorSpec s;
  s.family = PriorFamily::truncated_normal;
  s.mu = mu;
  s.sigma = sigma;
  s.lower = lower;
  s.upper = upper;
  return s;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_normal_mass(double a, double b) {
  if (!(a < b)) return kOutsideSupport;
  // Work in whichever tail keeps both terms small.
  if (a > 0.0)
    return std::log(0.5 * (std::erfc(a / std::numbers::sqrt2) - std::erfc(b / std::numbers::sqrt2)));
  return std::log(0.5 * (std::erfc(-b / std::numbers::sqrt2) - std::erfc(-a / std::numbers::sqrt2)));
}

double log_prior_density(const PriorSpec& spec, double x, double anchored_sigma) {
  const double sigma = spec.family == PriorFamily::anchored ? anchored_sigma : spec.sigma;
  if (!(sigma > 0.0) || !std::isfinite(x)) return kOutsideSupport;
  if (spec.bounded() && (x < spec.lower || x > spec.upper)) return kOutsideSupport;
  const double u = (x - spec.mu) / sigma;
  double logp = -0.5 * u * u - kLogSqrt2Pi - std::log(sigma);
  if (spec.bounded())
    logp -= log_normal_mass((spec.lower - spec.mu) / spec.sigma, (spec.upper - spec.mu) / spec.sigma);
  return logp;
}

PriorSet make_priors(const PriorConfig& config, const ZoneNetwork& network,
                     const TreeCotree& decomp) {
  PriorSet set;
  set.layout = ParameterLayout::for_network(network, decomp);
  set.specs.resize(static_cast<std::size_t>(set.layout.dim()));

  auto pick = [&](const BlockPrior& block, const std::string& key) {
    auto it = block.overrides.find(key);
    return it == block.overrides.end() ? block.base : it->second;
  };
  auto check_overrides = [&](const BlockPrior& block, const std::vector<std::string>& keys,
                             const char* what) {
    for (const auto& [key, spec] : block.overrides)
      if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw PriorError(std::string("prior override for unknown ") + what + " '" + key + "'");
  };
  auto validate = [](const PriorSpec& s) {
    if (!(s.sigma > 0.0)) throw PriorError("prior sigma must be positive");
    if (s.bounded() && !(s.lower < s.upper)) throw PriorError("prior lower bound must be below upper");
  };

  std::vector<std::string> zone_ids, flow_ids, thermal_ids;
  for (std::size_t z : network.interior_zones()) zone_ids.push_back(network.zones()[z].id);
  for (std::size_t e : decomp.cotree_edges) flow_ids.push_back(network.flow_edges()[e].id);
  for (const auto& e : network.thermal_edges()) thermal_ids.push_back(e.id);
  check_overrides(config.occupancy, zone_ids, "zone");
  check_overrides(config.capacitances, zone_ids, "zone");
  check_overrides(config.sigma_co2, zone_ids, "zone");
  check_overrides(config.sigma_temp, zone_ids, "zone");
  check_overrides(config.flows, flow_ids, "flow edge");
  check_overrides(config.resistances, thermal_ids, "thermal edge");

  const auto& L = set.layout;
  auto fill = [&](Block b, const BlockPrior& block, const std::vector<std::string>& keys) {
    for (Eigen::Index k = 0; k < L.size(b); ++k) {
      PriorSpec s = pick(block, keys[static_cast<std::size_t>(k)]);
      validate(s);
      set.specs[static_cast<std::size_t>(L.offset(b) + k)] = s;
    }
  };
  fill(Block::occupancy, config.occupancy, zone_ids);
  fill(Block::flows, config.flows, flow_ids);
  fill(Block::resistance, config.resistances, thermal_ids);
  fill(Block::capacitance, config.capacitances, zone_ids);
  fill(Block::sigma_co2, config.sigma_co2, zone_ids);
  fill(Block::sigma_temp, config.sigma_temp, zone_ids);

  auto anchor_block = [&](Block b, Block sigma_block) {
    for (Eigen::Index k = 0; k < L.size(b); ++k) {
      PriorSpec s;
      s.family = PriorFamily::anchored;
      const auto& sigma_spec = set.specs[static_cast<std::size_t>(L.offset(sigma_block) + k)];
      s.sigma = sigma_spec.mu;  // nominal noise level when not sampled
      if (config.anchor_sigma == AnchorSigma::sampled) s.sigma_index = L.offset(sigma_block) + k;
      set.specs[static_cast<std::size_t>(L.offset(b) + k)] = s;
    }
  };
  anchor_block(Block::co2_initial, Block::sigma_co2);
  anchor_block(Block::temp_initial, Block::sigma_temp);
  return set;
}

PriorSet anchor_priors(const PriorSet& priors, const ZoneNetwork& network, const WindowData& window) {
  if (window.times.empty()) throw PriorError("cannot anchor priors to an empty window");
  PriorSet out = priors;
  const auto& L = out.layout;
  const auto& interior = network.interior_zones();
  for (std::size_t s = 0; s < interior.size(); ++s) {
    const auto z = as_index(interior[s]);
    out.specs[static_cast<std::size_t>(L.offset(Block::co2_initial)) + s].mu = window.co2(z, 0);
    out.specs[static_cast<std::size_t>(L.offset(Block::temp_initial)) + s].mu = window.temp(z, 0);
  }
  return out;
}

double log_prior(const Eigen::VectorXd& theta, const PriorSet& priors) {
  if (theta.size() != as_index(priors.specs.size()))
    throw PriorError("prior set covers " + std::to_string(priors.specs.size()) +
                     " coordinates, theta has " + std::to_string(theta.size()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const PriorSpec& spec = priors.specs[static_cast<std::size_t>(i)];
    const double anchored_sigma = spec.sigma_index ? theta[*spec.sigma_index] : spec.sigma;
    const double lp = log_prior_density(spec, theta[i], anchored_sigma);
    if (is_outside_support(lp)) return kOutsideSupport;
    total += lp;
  }
  return total;
}

double log_likelihood_field(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& predicted,
                            const Eigen::VectorXd& sigma) {
  if (observed.rows() != predicted.rows() || observed.cols() != predicted.cols())
    throw PriorError("observed and predicted shapes differ");
  if (sigma.size() != observed.rows()) throw PriorError("need one sigma per zone");
  const double n = static_cast<double>(observed.cols());
  double total = 0.0;
  for (Eigen::Index j = 0; j < observed.rows(); ++j) {
    const double s = sigma[j];
    if (!(s > 0.0)) throw PriorError("noise sigma must be positive");
    const double sq = (observed.row(j) - predicted.row(j)).squaredNorm();
    total += -0.5 * sq / (s * s) - n * (kLogSqrt2Pi + std::log(s));
  }
  return total;
}

namespace {

Eigen::MatrixXd interior_rows(const ZoneNetwork& network, const Eigen::MatrixXd& m) {
  const auto& interior = network.interior_zones();
  Eigen::MatrixXd out(as_index(interior.size()), m.cols());
  for (std::size_t s = 0; s < interior.size(); ++s) out.row(as_index(s)) = m.row(as_index(interior[s]));
  return out;
}

}  // namespace

double log_likelihood(const ZoneNetwork& network, const WindowData& window,
                      const Trajectory& predicted, const Eigen::VectorXd& sigma_co2,
                      const Eigen::VectorXd& sigma_temp) {
  const auto zones = as_index(network.zone_count());
  if (window.co2.rows() != zones || window.temp.rows() != zones || predicted.co2.rows() != zones ||
      predicted.temp.rows() != zones)
    throw PriorError("window and prediction must carry every zone");
  if (predicted.co2.cols() != as_index(window.times.size()) ||
      predicted.temp.cols() != as_index(window.times.size()))
    throw PriorError("prediction is not sampled at the window times");
  return log_likelihood_field(interior_rows(network, window.co2), interior_rows(network, predicted.co2),
                              sigma_co2) +
         log_likelihood_field(interior_rows(network, window.temp),
                              interior_rows(network, predicted.temp), sigma_temp);
}

Eigen::VectorXd sample_prior(const PriorSet& priors, Rng& rng) {
  Eigen::VectorXd theta(as_index(priors.specs.size()));
  // Non-anchored first so anchored entries can read their sampled sigma.
  for (std::size_t i = 0; i < priors.specs.size(); ++i) {
    const PriorSpec& s = priors.specs[i];
    if (s.family == PriorFamily::normal) {
      theta[as_index(i)] = rng.normal(s.mu, s.sigma);
    } else if (s.family == PriorFamily::truncated_normal) {
      const double lo = normal_cdf((s.lower - s.mu) / s.sigma);
      const double hi = normal_cdf((s.upper - s.mu) / s.sigma);
      const double p = std::clamp(lo + rng.uniform() * (hi - lo), 1e-300, 1.0 - 1e-16);
      const double x = s.mu + s.sigma * std::numbers::sqrt2 * boost::math::erf_inv(2.0 * p - 1.0);
      theta[as_index(i)] = std::clamp(x, s.lower, s.upper);
    }
  }
  for (std::size_t i = 0; i < priors.specs.size(); ++i) {
    const PriorSpec& s = priors.specs[i];
    if (s.family != PriorFamily::anchored) continue;
    const double sd = s.sigma_index ? theta[*s.sigma_index] : s.sigma;
    theta[as_index(i)] = rng.normal(s.mu, sd);
  }
  return theta;
}

Eigen::VectorXd repair_into_support(const Eigen::VectorXd& theta, const PriorSet& priors) {
  Eigen::VectorXd out = theta;
  for (std::size_t i = 0; i < priors.specs.size(); ++i) {
    const PriorSpec& s = priors.specs[i];
    double& x = out[as_index(i)];
    if (!std::isfinite(x)) x = s.mu;
    if (!s.bounded()) continue;
    const double margin = 0.01 * (s.upper - s.lower);
    if (x < s.lower) x = s.lower + margin;
    if (x > s.upper) x = s.upper - margin;
  }
  const auto& L = priors.layout;
  for (Block b : {Block::sigma_co2, Block::sigma_temp}) {
    for (Eigen::Index k = 0; k < L.size(b); ++k) {
      const auto i = L.offset(b) + k;
      const PriorSpec& s = priors.specs[static_cast<std::size_t>(i)];
      if (!(out[i] > 0.0)) out[i] = s.mu > 0.0 ? s.mu : 0.01 * (s.upper - s.lower);
    }
  }
  return out;
}

LogPosterior::LogPosterior(const ForwardModel& model, PriorSet priors, WindowData window)
    : model_(&model), priors_(std::move(priors)), window_(std::move(window)) {
  if (window_.times.size() < 2) throw PriorError("window needs at least two samples");
}

double LogPosterior::operator()(const Eigen::VectorXd& theta) const {
  const double lp = log_prior(theta, priors_);
  if (is_outside_support(lp)) return kOutsideSupport;
  const auto& L = priors_.layout;
  const Eigen::VectorXd sigma_co2 = theta.segment(L.offset(Block::sigma_co2), L.size(Block::sigma_co2));
  const Eigen::VectorXd sigma_temp =
      theta.segment(L.offset(Block::sigma_temp), L.size(Block::sigma_temp));
  if ((sigma_co2.array() <= 0.0).any() || (sigma_temp.array() <= 0.0).any()) return kOutsideSupport;

  PhysicalParams params{theta.segment(L.offset(Block::occupancy), L.size(Block::occupancy)),
                        theta.segment(L.offset(Block::flows), L.size(Block::flows)),
                        theta.segment(L.offset(Block::resistance), L.size(Block::resistance)),
                        theta.segment(L.offset(Block::capacitance), L.size(Block::capacitance))};
  const Eigen::VectorXd c0 = theta.segment(L.offset(Block::co2_initial), L.size(Block::co2_initial));
  const Eigen::VectorXd t0 = theta.segment(L.offset(Block::temp_initial), L.size(Block::temp_initial));
  forward_calls_.fetch_add(1, std::memory_order_relaxed);
  const Trajectory traj = model_->simulate(params, c0, t0, window_.boundary, window_.times);
  const double ll = log_likelihood(model_->network(), window_, traj, sigma_co2, sigma_temp);
  if (!std::isfinite(ll)) return kOutsideSupport;
  return lp + ll;
}

double log_posterior(const Eigen::VectorXd& theta, const WindowData& window,
                     const PriorSet& anchored_priors, const ForwardModel& model) {
  const LogPosterior post(model, anchored_priors, window);
  return post(theta);
}

}  // namespace zonenet

#pragma once

#include <Eigen/Core>

#include <array>
#include <atomic>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "zonenet/forward.hpp"
#include "zonenet/network.hpp"
#include "zonenet/rng.hpp"

namespace zonenet {

class PriorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Log-density of a point outside the prior support. Callers test with
// is_outside_support() and never do arithmetic on it.
inline constexpr double kOutsideSupport = -std::numeric_limits<double>::infinity();
inline bool is_outside_support(double logp) { return logp == kOutsideSupport; }

// Flat ordering of the inference vector, fixed:
//   occupancy | independent flows | CO2 initials | resistances |
//   capacitances | temperature initials | sigma CO2 | sigma temperature
enum class Block : int {
  occupancy,
  flows,
  co2_initial,
  resistance,
  capacitance,
  temp_initial,
  sigma_co2,
  sigma_temp,
};
inline constexpr std::array<Block, 8> kBlocks = {
    Block::occupancy,   Block::flows,        Block::co2_initial, Block::resistance,
    Block::capacitance, Block::temp_initial, Block::sigma_co2,   Block::sigma_temp};

const char* block_name(Block b);

class ParameterLayout {
 public:
  ParameterLayout() = default;
  ParameterLayout(std::size_t interior_zones, std::size_t independent_flows,
                  std::size_t thermal_edges);
  static ParameterLayout for_network(const ZoneNetwork& network, const TreeCotree& decomp);

  Eigen::Index offset(Block b) const { return offsets_[static_cast<std::size_t>(b)]; }
  Eigen::Index size(Block b) const { return sizes_[static_cast<std::size_t>(b)]; }
  Eigen::Index dim() const { return dim_; }
  Block block_of(Eigen::Index flat) const;

 private:
  std::array<Eigen::Index, 8> offsets_{};
  std::array<Eigen::Index, 8> sizes_{};
  Eigen::Index dim_ = 0;
};

// Named-block view of the inference vector.
struct ParameterVector {
  Eigen::VectorXd occupancy;
  Eigen::VectorXd independent_flows;
  Eigen::VectorXd co2_initials;
  Eigen::VectorXd resistances;
  Eigen::VectorXd capacitances;
  Eigen::VectorXd temp_initials;
  Eigen::VectorXd sigma_co2;
  Eigen::VectorXd sigma_temp;

  Eigen::VectorXd flatten() const;
  static ParameterVector unflatten(const ParameterLayout& layout, const Eigen::VectorXd& flat);
  PhysicalParams physical() const;
};

// Human-readable coordinate names, e.g. "occupancy[A]", "R[A-B]".
std::vector<std::string> coordinate_names(const ZoneNetwork& network, const TreeCotree& decomp);

enum class PriorFamily { normal, truncated_normal, anchored };

struct PriorSpec {
  PriorFamily family = PriorFamily::normal;
  double mu = 0.0;
  double sigma = 1.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  // Anchored entries take their standard deviation from this flat index of
  // theta when set, otherwise from `sigma`.
  std::optional<Eigen::Index> sigma_index;

  static PriorSpec normal(double mu, double sigma);
  static PriorSpec truncated(double mu, double sigma, double lower, double upper);
  bool bounded() const { return family == PriorFamily::truncated_normal; }
};

// log of the standard-normal mass on [a, b], tail-stable.
double log_normal_mass(double a, double b);
double normal_cdf(double x);
double log_prior_density(const PriorSpec& spec, double x, double anchored_sigma);

enum class AnchorSigma { sampled, fixed };

struct BlockPrior {
  PriorSpec base;
  std::map<std::string, PriorSpec> overrides;  // keyed by zone or edge id
};

// Prior description as it appears in config: one entry per block, with
// per-zone (or per-edge) overrides. Initial-state blocks are always anchored
// to the first observation of the window.
struct PriorConfig {
  BlockPrior occupancy;
  BlockPrior flows;
  BlockPrior resistances;
  BlockPrior capacitances;
  BlockPrior sigma_co2;
  BlockPrior sigma_temp;
  AnchorSigma anchor_sigma = AnchorSigma::sampled;
};

struct PriorSet {
  ParameterLayout layout;
  std::vector<PriorSpec> specs;  // one per flat index
};

PriorSet make_priors(const PriorConfig& config, const ZoneNetwork& network,
                     const TreeCotree& decomp);

// Window data. Matrices hold every zone (boundary rows are the ambient
// record); times are re-based to the window start. `boundary` may extend past
// the last window time so forecasts can use the recorded ambient.
struct WindowData {
  std::vector<double> times;
  Eigen::MatrixXd co2;
  Eigen::MatrixXd temp;
  BoundarySeries boundary;
};

// Copy of `priors` with anchored blocks centred on the window's first
// observation of each interior zone.
PriorSet anchor_priors(const PriorSet& priors, const ZoneNetwork& network, const WindowData& window);

double log_prior(const Eigen::VectorXd& theta, const PriorSet& priors);

// Gaussian log-likelihood over interior zones of both fields, including the
// log(2 pi sigma^2) normalisation.
double log_likelihood(const ZoneNetwork& network, const WindowData& window,
                      const Trajectory& predicted, const Eigen::VectorXd& sigma_co2,
                      const Eigen::VectorXd& sigma_temp);

// Single-field variant on interior rows already extracted (zones x N).
double log_likelihood_field(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& predicted,
                            const Eigen::VectorXd& sigma);

// Draws theta from the prior (truncated coordinates by inverse CDF).
Eigen::VectorXd sample_prior(const PriorSet& priors, Rng& rng);

// Clamps out-of-support coordinates back inside, 1% of the width away from
// the violated bound; sigma coordinates are kept positive.
Eigen::VectorXd repair_into_support(const Eigen::VectorXd& theta, const PriorSet& priors);

class LogPosterior {
 public:
  // `priors` must already be anchored to `window`.
  LogPosterior(const ForwardModel& model, PriorSet priors, WindowData window);
  LogPosterior(const LogPosterior&) = delete;
  LogPosterior& operator=(const LogPosterior&) = delete;

  double operator()(const Eigen::VectorXd& theta) const;
  std::size_t forward_calls() const { return forward_calls_.load(); }

  const PriorSet& priors() const { return priors_; }
  const WindowData& window() const { return window_; }

 private:
  const ForwardModel* model_;
  PriorSet priors_;
  WindowData window_;
  mutable std::atomic<std::size_t> forward_calls_{0};
};

double log_posterior(const Eigen::VectorXd& theta, const WindowData& window,
                     const PriorSet& anchored_priors, const ForwardModel& model);

}  // namespace zonenet

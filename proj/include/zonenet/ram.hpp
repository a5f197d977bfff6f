#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "zonenet/rng.hpp"

namespace zonenet {

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RamConfig {
  std::size_t iterations = 20000;
  std::size_t burn_in = 10000;
  double target_accept = 0.234;
  double adapt_exponent = 2.0 / 3.0;  // step size gamma_i = min(1, scale * i^-exponent)
  double adapt_scale = 0.0;           // scale; 0 means the parameter dimension
  double initial_scale = 0.01;        // proposal sd as a fraction of |theta_0|
  bool freeze_after_burn_in = false;
  std::uint64_t seed = 1;

  void validate() const;
};

// Chain state. `factor` is the lower-triangular proposal factor S with
// S S^T the proposal covariance.
struct ChainState {
  Eigen::VectorXd theta;
  double log_post = 0.0;
  Eigen::MatrixXd factor;
  std::size_t iteration = 0;
};

struct ChainOutput {
  Eigen::MatrixXd samples;  // kept iterations x dim
  Eigen::VectorXd log_posts;
  double acceptance_rate = 0.0;  // over the kept iterations
  double overall_acceptance = 0.0;
  std::size_t skipped_adaptations = 0;
  ChainState final_state;
};

struct Proposal {
  Eigen::VectorXd theta;
  Eigen::VectorXd z;
};

Proposal propose(const ChainState& state, Rng& rng);

// min(1, exp(proposed - current)); 0 for a proposal outside the support.
double accept_prob(double logp_current, double logp_proposed);

// Adapted factor S' with S'S'^T = S (I + gamma (alpha - target) u u^T) S^T,
// u = z/|z|, gamma = min(1, scale * iteration^-adapt_exponent) with scale
// adapt_scale, or dim(z) when that is 0. Returns nullopt when the
// downdate would lose positive definiteness (the caller keeps S).
std::optional<Eigen::MatrixXd> ram_adapt(const Eigen::MatrixXd& factor, const Eigen::VectorXd& z,
                                         double alpha, std::size_t iteration,
                                         const RamConfig& config);

// In-place rank-one modification of a lower-triangular Cholesky factor:
// L L^T <- L L^T + sign * v v^T. Returns false (L undefined) when a
// downdate is not positive definite.
bool cholesky_rank_one(Eigen::MatrixXd& lower, Eigen::VectorXd v, double sign);

using LogDensityFn = std::function<double(const Eigen::VectorXd&)>;

struct TraceRecord {
  std::size_t iteration;
  double log_post;
  bool accepted;
};
using TraceFn = std::function<void(const TraceRecord&)>;

// Runs the adaptive chain from `init`. The initial factor is diagonal with
// entries max(initial_scale * |init_i|, init_scales_i).
ChainOutput run_chain(const LogDensityFn& logpost, const Eigen::VectorXd& init,
                      const Eigen::VectorXd& init_scales, const RamConfig& config, Rng& rng,
                      const TraceFn& trace = {});

// Same, starting from a given lower-triangular factor (for example one
// adapted on an overlapping window).
ChainOutput run_chain_from_factor(const LogDensityFn& logpost, const Eigen::VectorXd& init,
                                  const Eigen::MatrixXd& initial_factor, const RamConfig& config,
                                  Rng& rng, const TraceFn& trace = {});

void write_trace_header(std::ostream& out);
TraceFn csv_trace(std::ostream& out);

}  // namespace zonenet

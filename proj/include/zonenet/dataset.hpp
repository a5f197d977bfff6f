#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "zonenet/forward.hpp"
#include "zonenet/network.hpp"

namespace zonenet {

// Time-indexed observations of every zone. Boundary rows hold the ambient
// record that drives the model.
struct Dataset {
  std::vector<double> times;
  Eigen::MatrixXd co2;
  Eigen::MatrixXd temp;
  std::optional<Eigen::MatrixXd> noiseless_co2;
  std::optional<Eigen::MatrixXd> noiseless_temp;

  std::size_t sample_count() const { return times.size(); }

  // Throws std::invalid_argument on inconsistent shapes or a non-increasing
  // time axis.
  void validate(const ZoneNetwork& network) const;

  // Boundary rows from sample `first` on, with times shifted by -origin.
  BoundarySeries boundary(const ZoneNetwork& network, std::size_t first = 0,
                          double origin = 0.0) const;
};

// Rows of `m` belonging to interior zones, in interior order.
Eigen::MatrixXd interior_rows(const ZoneNetwork& network, const Eigen::MatrixXd& m);

}  // namespace zonenet

#pragma once

#include <Eigen/Core>

#include <vector>

#include "zonenet/csv.hpp"

namespace zonenet {

struct CalibrationResult {
  RawSensorTable table;
  Eigen::VectorXd co2_offsets;   // per table zone; zero for excluded zones
  Eigen::VectorXd temp_offsets;
};

// Per field and zone: offset = baseline mean of the zone minus the grand
// mean over the participating zones; the offset is subtracted from the whole
// column. `participating` (one flag per table zone) defaults to all zones.
// The baseline is [t0, t1] inclusive and must hold at least two samples.
CalibrationResult offset_calibrate(const RawSensorTable& table, double t0, double t1,
                                   const std::vector<bool>& participating = {});

// Samples with t0 <= t <= t1, optionally re-based so the first is at 0.
RawSensorTable extract_interval(const RawSensorTable& table, double t0, double t1, bool rebase = true);

}  // namespace zonenet
